//! Browser bindings: pattern sweep, Γ phase map and alphabet constellation.
//!
//! Each export wraps a plain function that is also callable (and tested)
//! natively; only the error conversion touches JavaScript.

use ris_core::alphabet::{by_name, constellation_stats};
use ris_core::scenario::{
    design_scenario, run_scenario, CriterionKind, CriterionSpec, FieldRegime, RunOptions, Scenario,
};
use wasm_bindgen::prelude::*;

/// Inputs shared by the sweep and the colour map.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct DemoParams {
    criterion: String,
    alphabet: String,
    pub levels: usize,
    pub frequency_ghz: f64,
    pub pitch_divisor: f64,
    pub aperture_m: f64,
    pub target_deg: f64,
    /// Receiver distance in metres; zero or negative selects the far field.
    pub near_radius_m: f64,
    /// Incidence angle of a second illumination; NaN disables it.
    pub interferer_deg: f64,
    pub step_deg: f64,
}

#[wasm_bindgen]
impl DemoParams {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Self {
        Self {
            criterion: "alphabet".into(),
            alphabet: "testbed2p3".into(),
            levels: 2,
            frequency_ghz: 2.3,
            pitch_divisor: 8.0,
            aperture_m: 1.0,
            target_deg: 45.0,
            near_radius_m: 0.0,
            interferer_deg: f64::NAN,
            step_deg: 0.25,
        }
    }

    #[wasm_bindgen(setter)]
    pub fn set_criterion(&mut self, v: String) {
        self.criterion = v;
    }

    #[wasm_bindgen(setter)]
    pub fn set_alphabet(&mut self, v: String) {
        self.alphabet = v;
    }
}

impl Default for DemoParams {
    fn default() -> Self {
        Self::new()
    }
}

impl DemoParams {
    fn scenario(&self) -> Result<Scenario, String> {
        let kind = match self.criterion.as_str() {
            "uacp" => CriterionKind::Uacp,
            "uadp" => CriterionKind::Uadp,
            "uaep" => CriterionKind::Uaep,
            "alphabet" => CriterionKind::Alphabet,
            "specular" => CriterionKind::Specular,
            "diffuser" => CriterionKind::Diffuser,
            other => return Err(format!("unknown criterion `{other}`")),
        };
        let spec = CriterionSpec { kind, levels: Some(self.levels), alphabet: Some(self.alphabet.clone()) };
        let mut s = Scenario::new("demo", self.frequency_ghz * 1e9, self.pitch_divisor, self.target_deg, spec);
        s.aperture_m = self.aperture_m;
        if self.near_radius_m > 0.0 {
            s.field = FieldRegime::Near { radius_m: self.near_radius_m };
        }
        if self.interferer_deg.is_finite() {
            s.interferer_angles_deg = vec![self.interferer_deg];
        }
        s.sweep.step_deg = self.step_deg;
        s.seed = 1;
        Ok(s)
    }
}

/// Sweep output in flat arrays, ready for canvas plotting.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SweepOutput {
    angles: Vec<f64>,
    db: Vec<f64>,
    interference_db: Vec<f64>,
    pub peak_angle: f64,
    pub grid: usize,
}

#[wasm_bindgen]
impl SweepOutput {
    #[wasm_bindgen(getter)]
    pub fn angles(&self) -> Vec<f64> {
        self.angles.clone()
    }

    /// Normalized dB of the designed illumination.
    #[wasm_bindgen(getter)]
    pub fn db(&self) -> Vec<f64> {
        self.db.clone()
    }

    /// Normalized dB under the interfering illumination; empty if disabled.
    #[wasm_bindgen(getter)]
    pub fn interference_db(&self) -> Vec<f64> {
        self.interference_db.clone()
    }
}

/// Demo traces are drawn, not stored, so cap the element count well below
/// the command-line budget.
const DEMO_BUDGET: usize = 40_000;

fn options() -> RunOptions {
    RunOptions { element_budget: DEMO_BUDGET, ..Default::default() }
}

pub fn compute_sweep(p: &DemoParams) -> Result<SweepOutput, String> {
    let r = run_scenario(&p.scenario()?, &options()).map_err(|e| e.to_string())?;
    Ok(SweepOutput {
        grid: r.geometry.n_rows(),
        peak_angle: r.metrics.peak_angle,
        angles: r.trace.angles,
        db: r.trace.power_db_normalized,
        interference_db: r
            .interference
            .into_iter()
            .next()
            .map(|i| i.trace.power_db_normalized)
            .unwrap_or_default(),
    })
}

/// Row-major `N × N` phases in degrees.
pub fn compute_phase_map(p: &DemoParams) -> Result<Vec<f64>, String> {
    let (parts, _) = design_scenario(&p.scenario()?, &options()).map_err(|e| e.to_string())?;
    Ok(parts.config.phases_degrees().iter().copied().collect())
}

/// Interleaved `re, im` of each entry, followed by the centroid.
pub fn compute_constellation(name: &str) -> Result<Vec<f64>, String> {
    let a = by_name(name).map_err(|e| e.to_string())?;
    let c = constellation_stats(&a).centroid;
    Ok(a.values().iter().chain(std::iter::once(&c)).flat_map(|v| [v.re, v.im]).collect())
}

#[wasm_bindgen]
pub fn sweep(p: &DemoParams) -> Result<SweepOutput, JsValue> {
    compute_sweep(p).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn phase_map(p: &DemoParams) -> Result<Vec<f64>, JsValue> {
    compute_phase_map(p).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn constellation(name: &str) -> Result<Vec<f64>, JsValue> {
    compute_constellation(name).map_err(|e| JsValue::from_str(&e))
}
