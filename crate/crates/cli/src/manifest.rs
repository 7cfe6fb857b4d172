//! Reproducibility record written next to every run.

use serde::Serialize;
use sha2::{Digest, Sha256};

use ris_core::scenario::Scenario;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_file: String,
    /// SHA-256 of the canonical JSON encoding of the effective scenarios.
    pub scenario_digest: String,
    pub seeds: Vec<u64>,
    pub normalization: String,
    pub runtime_s: f64,
    pub entries: Vec<EntryRecord>,
}

#[derive(Debug, Serialize)]
pub struct EntryRecord {
    pub name: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub grid: Option<(usize, usize)>,
    pub peak_angle_deg: Option<f64>,
    pub optimizer_sweeps: Option<usize>,
    pub trace: Option<String>,
    pub interference: Vec<String>,
    pub colormaps: Vec<String>,
}

impl EntryRecord {
    pub fn new(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            status: "ok",
            error: None,
            grid: None,
            peak_angle_deg: None,
            optimizer_sweeps: None,
            trace: None,
            interference: Vec::new(),
            colormaps: Vec::new(),
        }
    }
}


/// Keys are sorted and floats use the shortest round-trip form, so the
/// digest ignores formatting, comments and key order in the source file.
pub fn scenario_digest(scenarios: &[Scenario]) -> String {
    let value = serde_json::to_value(scenarios).expect("scenarios serialize");
    let canonical = serde_json::to_string(&value).expect("json value serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
