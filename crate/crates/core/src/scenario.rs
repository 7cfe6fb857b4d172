//! Declarative experiments.
//!
//! A scenario fixes the carrier, the element pitch as a fraction of the
//! wavelength, a square aperture, a design criterion, a target reradiation
//! angle and the receiver regime. The transmitter always illuminates the
//! surface at normal incidence from the far-field radius.
//!
//! Scenario files are TOML, either a single scenario at top level or an
//! array of `[[scenario]]` tables:
//!
//! ```toml
//! [[scenario]]
//! name = "testbed-45"
//! frequency_hz = 2.3e9
//! pitch_divisor = 8          # d = λ/8
//! aperture_m = 1.0
//! target_deg = 45.0
//! interferer_angles_deg = [-15.0]
//! seed = 7
//! criterion = { kind = "alphabet", alphabet = "testbed2p3" }
//! field = { regime = "near", radius_m = 5.0 }
//! sweep = { theta_min_deg = -90.0, theta_max_deg = 90.0, step_deg = 0.1 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alphabet::{by_name, load_alphabet, Alphabet, LoadOptions};
use crate::channel::ChannelPair;
use crate::designer::{design, DesignCriterion, Initialization, OptimizerOptions, OptimizerReport, SurfaceConfig};
use crate::error::{Error, Result};
use crate::geometry::{GainPattern, RisGeometry, Role, Terminal, Wave};
use crate::pattern::{
    extract_metrics, far_field_radius, interference_study, sweep, BeamMetrics, PatternTrace, RadiusMode,
    SweepSpec,
};

pub const DEFAULT_ELEMENT_BUDGET: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Uacp,
    Uadp,
    Uaep,
    Alphabet,
    Specular,
    Diffuser,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Built-in name, `uadp:<L>`, or a path to an alphabet table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldRegime {
    #[default]
    Far,
    Near {
        #[serde(default = "default_near_radius")]
        radius_m: f64,
    },
}

fn default_near_radius() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default = "default_theta_min")]
    pub theta_min_deg: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max_deg: f64,
    #[serde(default = "default_step")]
    pub step_deg: f64,
}

fn default_theta_min() -> f64 {
    -90.0
}
fn default_theta_max() -> f64 {
    90.0
}
fn default_step() -> f64 {
    0.1
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { theta_min_deg: -90.0, theta_max_deg: 90.0, step_deg: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    First,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default)]
    pub init: InitKind,
}

fn default_max_sweeps() -> usize {
    100
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { epsilon: None, max_sweeps: 100, init: InitKind::First }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub frequency_hz: f64,
    /// Pitch is `λ / pitch_divisor` along both axes.
    pub pitch_divisor: f64,
    #[serde(default = "one")]
    pub aperture_m: f64,
    pub target_deg: f64,
    pub criterion: CriterionSpec,
    #[serde(default)]
    pub field: FieldRegime,
    #[serde(default)]
    pub interferer_angles_deg: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default = "one")]
    pub p_tx_w: f64,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
}

impl Scenario {
    /// Minimal scenario with defaults for everything optional.
    pub fn new(name: &str, frequency_hz: f64, pitch_divisor: f64, target_deg: f64, criterion: CriterionSpec) -> Self {
        Self {
            name: name.to_string(),
            frequency_hz,
            pitch_divisor,
            aperture_m: 1.0,
            target_deg,
            criterion,
            field: FieldRegime::Far,
            interferer_angles_deg: Vec::new(),
            seed: 0,
            sweep: SweepSettings::default(),
            p_tx_w: 1.0,
            optimizer: OptimizerSettings::default(),
        }
    }

    pub fn wave(&self) -> Result<Wave> {
        Wave::new(self.frequency_hz)
    }

    /// `N = M = ⌊aperture / d⌋`.
    pub fn geometry(&self) -> Result<RisGeometry> {
        if !(self.pitch_divisor > 0.0 && self.pitch_divisor.is_finite()) {
            return Err(Error::Scenario(format!("pitch_divisor must be positive, got {}", self.pitch_divisor)));
        }
        if !(self.aperture_m > 0.0 && self.aperture_m.is_finite()) {
            return Err(Error::Scenario(format!("aperture_m must be positive, got {}", self.aperture_m)));
        }
        let pitch = self.wave()?.wavelength() / self.pitch_divisor;
        let n = (self.aperture_m / pitch + 1e-9).floor() as usize;
        if n == 0 {
            return Err(Error::Scenario(format!(
                "aperture {} m holds no element of pitch {pitch} m",
                self.aperture_m
            )));
        }
        RisGeometry::square(n, pitch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_deg > -90.0 && self.target_deg < 90.0) {
            return Err(Error::Scenario(format!("target_deg must lie in (−90, 90), got {}", self.target_deg)));
        }
        if let Some(a) = self.interferer_angles_deg.iter().find(|a| !(**a > -90.0 && **a < 90.0)) {
            return Err(Error::Scenario(format!("interferer angle {a} outside (−90, 90)")));
        }
        if !(self.p_tx_w > 0.0) {
            return Err(Error::Scenario(format!("p_tx_w must be positive, got {}", self.p_tx_w)));
        }
        if let FieldRegime::Near { radius_m } = self.field {
            if !(radius_m > 0.0) {
                return Err(Error::Scenario(format!("near-field radius must be positive, got {radius_m}")));
            }
        }
        self.geometry()?;
        Ok(())
    }

    fn resolve_alphabet(&self, base_dir: Option<&Path>) -> Result<Alphabet> {
        let name = self
            .criterion
            .alphabet
            .as_deref()
            .ok_or_else(|| Error::Scenario(format!("criterion {:?} needs `alphabet`", self.criterion.kind)))?;
        let looks_like_path = name.contains('/') || name.contains('\\') || name.contains('.');
        if !looks_like_path {
            return by_name(name);
        }
        let path = match base_dir {
            Some(b) if Path::new(name).is_relative() => b.join(name),
            _ => PathBuf::from(name),
        };
        let file = std::fs::File::open(&path)?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let loaded = load_alphabet(std::io::BufReader::new(file), &LoadOptions { label, ..Default::default() })?;
        Ok(loaded.alphabet)
    }

    pub fn resolve_criterion(&self, base_dir: Option<&Path>) -> Result<DesignCriterion> {
        Ok(match self.criterion.kind {
            CriterionKind::Uacp => DesignCriterion::Uacp,
            CriterionKind::Uadp => {
                let levels = self
                    .criterion
                    .levels
                    .ok_or_else(|| Error::Scenario("criterion `uadp` needs `levels`".into()))?;
                if levels < 2 {
                    return Err(Error::Scenario(format!("uadp needs levels ≥ 2, got {levels}")));
                }
                DesignCriterion::Uadp { levels }
            }
            CriterionKind::Uaep => DesignCriterion::Uaep(self.resolve_alphabet(base_dir)?),
            CriterionKind::Alphabet => DesignCriterion::Alphabet(self.resolve_alphabet(base_dir)?),
            CriterionKind::Specular => DesignCriterion::Specular,
            CriterionKind::Diffuser => DesignCriterion::Diffuser { seed: self.seed },
        })
    }
}

const TOP_KEYS: &[&str] = &[
    "name",
    "frequency_hz",
    "pitch_divisor",
    "aperture_m",
    "target_deg",
    "criterion",
    "field",
    "interferer_angles_deg",
    "seed",
    "sweep",
    "p_tx_w",
    "optimizer",
];

fn nested_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "criterion" => Some(&["kind", "levels", "alphabet"]),
        "field" => Some(&["regime", "radius_m"]),
        "sweep" => Some(&["theta_min_deg", "theta_max_deg", "step_deg"]),
        "optimizer" => Some(&["epsilon", "max_sweeps", "init"]),
        _ => None,
    }
}

/// Removes unknown keys, returning their dotted paths.
fn strip_unknown(table: &mut toml::Table, prefix: &str) -> Vec<String> {
    let mut unknown = Vec::new();
    table.retain(|k, v| {
        if !TOP_KEYS.contains(&k) {
            unknown.push(format!("{prefix}{k}"));
            return false;
        }
        if let (Some(keys), toml::Value::Table(inner)) = (nested_keys(k), v) {
            inner.retain(|ik, _| {
                let known = keys.contains(&ik);
                if !known {
                    unknown.push(format!("{prefix}{k}.{ik}"));
                }
                known
            });
        }
        true
    });
    unknown
}

#[derive(Debug, Clone)]
pub struct ParsedScenarios {
    pub scenarios: Vec<Scenario>,
    /// Unknown keys that were ignored (lenient mode only).
    pub warnings: Vec<String>,
}

/// Parses scenario TOML. Unknown keys are an error unless `lenient`, in
/// which case they are dropped and reported as warnings.
pub fn parse_scenarios(text: &str, lenient: bool) -> Result<ParsedScenarios> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Scenario(e.to_string()))?;
    let mut tables: Vec<(String, toml::Table)> = match doc.get("scenario") {
        Some(toml::Value::Array(items)) => {
            if doc.len() > 1 {
                let extra: Vec<_> = doc.keys().filter(|k| *k != "scenario").cloned().collect();
                if !lenient {
                    return Err(Error::Scenario(format!("unknown top-level keys: {}", extra.join(", "))));
                }
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    toml::Value::Table(t) => Ok((format!("scenario[{i}]."), t.clone())),
                    _ => Err(Error::Scenario(format!("scenario[{i}] is not a table"))),
                })
                .collect::<Result<_>>()?
        }
        _ => vec![(String::new(), doc)],
    };

    let mut warnings = Vec::new();
    let mut scenarios = Vec::with_capacity(tables.len());
    for (prefix, table) in tables.iter_mut() {
        let unknown = strip_unknown(table, prefix);
        if !unknown.is_empty() {
            if !lenient {
                return Err(Error::Scenario(format!("unknown keys: {}", unknown.join(", "))));
            }
            for key in &unknown {
                log::warn!("ignoring unknown scenario key `{key}`");
            }
            warnings.extend(unknown);
        }
        let s: Scenario = table
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Scenario(format!("{prefix}: {e}")))?;
        s.validate()?;
        scenarios.push(s);
    }
    Ok(ParsedScenarios { scenarios, warnings })
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub element_budget: usize,
    pub allow_large: bool,
    /// Directory against which relative alphabet paths are resolved.
    pub base_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { element_budget: DEFAULT_ELEMENT_BUDGET, allow_large: false, base_dir: None }
    }
}

#[derive(Debug, Clone)]
pub struct InterferenceResult {
    pub theta_inc_deg: f64,
    pub trace: PatternTrace,
    pub metrics: BeamMetrics,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub geometry: RisGeometry,
    pub wave: Wave,
    pub tx: Terminal,
    /// Receiver location the configuration was designed for.
    pub design_rx: Terminal,
    pub config: SurfaceConfig,
    pub report: Option<OptimizerReport>,
    pub trace: PatternTrace,
    pub metrics: BeamMetrics,
    pub interference: Vec<InterferenceResult>,
}

/// Designs the surface for a scenario, without sweeping.
pub fn design_scenario(s: &Scenario, options: &RunOptions) -> Result<(ScenarioResultParts, Option<OptimizerReport>)> {
    s.validate()?;
    let geometry = s.geometry()?;
    let count = geometry.element_count();
    if count > options.element_budget && !options.allow_large {
        return Err(Error::ElementBudget { count, budget: options.element_budget });
    }
    let wave = s.wave()?;
    let tx_range = far_field_radius(&geometry, &wave);
    let tx = Terminal::isotropic([0.0, 0.0, tx_range], Role::Tx)?;
    let rx_range = match s.field {
        FieldRegime::Far => tx_range,
        FieldRegime::Near { radius_m } => radius_m,
    };
    let design_rx = Terminal::in_xz_plane(rx_range, s.target_deg, GainPattern::Isotropic, Role::Rx)?;
    let criterion = s.resolve_criterion(options.base_dir.as_deref())?;
    let pair = ChannelPair::compute(&geometry, &wave, &tx, &design_rx);
    let opt = OptimizerOptions {
        init: match s.optimizer.init {
            InitKind::First => Initialization::FirstEntry,
            InitKind::Random => Initialization::Random(s.seed),
        },
        epsilon: s.optimizer.epsilon,
        max_sweeps: s.optimizer.max_sweeps,
    };
    let (config, report) = design(&criterion, &pair, &opt)?;
    let spec = SweepSpec {
        theta_min: s.sweep.theta_min_deg,
        theta_max: s.sweep.theta_max_deg,
        step: s.sweep.step_deg,
        radius: RadiusMode::Fixed { radius_m: rx_range },
        rx_gain: GainPattern::Isotropic,
    };
    spec.validate()?;
    Ok((ScenarioResultParts { geometry, wave, tx, design_rx, config, spec }, report))
}

/// Intermediate design products of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResultParts {
    pub geometry: RisGeometry,
    pub wave: Wave,
    pub tx: Terminal,
    pub design_rx: Terminal,
    pub config: SurfaceConfig,
    pub spec: SweepSpec,
}

pub fn run_scenario(s: &Scenario, options: &RunOptions) -> Result<ScenarioResult> {
    let (parts, report) = design_scenario(s, options)?;
    let ScenarioResultParts { geometry, wave, tx, design_rx, config, spec } = parts;
    let trace = sweep(&geometry, &wave, &tx, &config, &spec, s.p_tx_w)?;
    let metrics = extract_metrics(&trace)?;
    let interference = s
        .interferer_angles_deg
        .iter()
        .map(|&theta| {
            let trace = interference_study(&geometry, &wave, &tx, &config, theta, &spec, s.p_tx_w)?;
            let metrics = extract_metrics(&trace)?;
            Ok(InterferenceResult { theta_inc_deg: theta, trace, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioResult { geometry, wave, tx, design_rx, config, report, trace, metrics, interference })
}

#[derive(Debug)]
pub struct BundleEntry {
    pub scenario: Scenario,
    pub outcome: std::result::Result<ScenarioResult, String>,
}

/// Results of a batch, in input order. Each trace is normalized to its own
/// maximum.
#[derive(Debug, Default)]
pub struct TraceBundle {
    pub entries: Vec<BundleEntry>,
}

impl TraceBundle {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }

    /// True when every successful trace was sampled on the same angles.
    pub fn shares_angle_grid(&self) -> bool {
        let mut grids = self.entries.iter().filter_map(|e| e.outcome.as_ref().ok()).map(|r| &r.trace.angles);
        match grids.next() {
            Some(first) => grids.all(|g| g == first),
            None => true,
        }
    }
}

/// Runs scenarios (concurrently when the `parallel` feature is on). A
/// failing scenario is recorded in its entry and does not stop the others.
pub fn run_grid(scenarios: &[Scenario], options: &RunOptions) -> TraceBundle {
    let run = |s: &Scenario| BundleEntry {
        scenario: s.clone(),
        outcome: run_scenario(s, options).map_err(|e| e.to_string()),
    };
    #[cfg(feature = "parallel")]
    let entries = {
        use rayon::prelude::*;
        scenarios.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entries = scenarios.iter().map(run).collect();
    TraceBundle { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, kind: CriterionKind) -> Scenario {
        let mut s = Scenario::new(name, 3.0e9, 2.0, 30.0, CriterionSpec { kind, levels: Some(2), alphabet: None });
        s.aperture_m = 0.5;
        s.sweep.step_deg = 1.0;
        s
    }

    #[test]
    fn element_count_uses_floor() {
        let s = small("a", CriterionKind::Uacp);
        let g = s.geometry().unwrap();
        let d: f64 = 299_792_458.0 / 3.0e9 / 2.0;
        assert_eq!(g.n_rows(), (0.5 / d).floor() as usize);
        assert!(g.aperture().0 <= 0.5);
    }

    #[test]
    fn parse_single_and_list() {
        let one = r#"
name = "x"
frequency_hz = 2.3e9
pitch_divisor = 4
target_deg = 45
criterion = { kind = "uacp" }
"#;
        let p = parse_scenarios(one, false).unwrap();
        assert_eq!(p.scenarios.len(), 1);
        assert_eq!(p.scenarios[0].aperture_m, 1.0);
        assert_eq!(p.scenarios[0].field, FieldRegime::Far);

        let list = r#"
[[scenario]]
name = "a"
frequency_hz = 3.6e9
pitch_divisor = 4
target_deg = 45
criterion = { kind = "alphabet", alphabet = "omni3p6" }
field = { regime = "near" }

[[scenario]]
name = "b"
frequency_hz = 3.6e9
pitch_divisor = 8
target_deg = -30
criterion = { kind = "uadp", levels = 4 }
interferer_angles_deg = [-15.0]
"#;
        let p = parse_scenarios(list, false).unwrap();
        assert_eq!(p.scenarios.len(), 2);
        assert_eq!(p.scenarios[0].field, FieldRegime::Near { radius_m: 5.0 });
        assert_eq!(p.scenarios[1].interferer_angles_deg, vec![-15.0]);
    }

    #[test]
    fn unknown_keys_strict_and_lenient() {
        let text = r#"
name = "x"
frequency_hz = 2.3e9
pitch_divisor = 4
target_deg = 45
colour = "red"
criterion = { kind = "uacp", flavour = 1 }
"#;
        let err = parse_scenarios(text, false).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("criterion.flavour"), "{err}");
        let p = parse_scenarios(text, true).unwrap();
        assert_eq!(p.warnings, vec!["colour".to_string(), "criterion.flavour".to_string()]);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = small("bad", CriterionKind::Uacp);
        s.target_deg = 90.0;
        assert!(s.validate().is_err());
        let mut s = small("bad", CriterionKind::Uadp);
        s.criterion.levels = None;
        assert!(s.resolve_criterion(None).is_err());
        let s = small("bad", CriterionKind::Alphabet);
        assert!(s.resolve_criterion(None).is_err());
        let mut s = small("bad", CriterionKind::Uacp);
        s.aperture_m = 1e-6;
        assert!(s.validate().is_err());
    }

    #[test]
    fn element_budget_refusal_reports_count() {
        let s = small("big", CriterionKind::Uacp);
        let n = s.geometry().unwrap().element_count();
        let opts = RunOptions { element_budget: n - 1, ..Default::default() };
        match run_scenario(&s, &opts) {
            Err(Error::ElementBudget { count, .. }) => assert_eq!(count, n),
            other => panic!("expected budget refusal, got {other:?}"),
        }
        let opts = RunOptions { element_budget: n - 1, allow_large: true, ..Default::default() };
        assert!(run_scenario(&s, &opts).is_ok());
    }

    #[test]
    fn grid_keeps_order_and_isolates_failures() {
        assert!(run_grid(&[], &RunOptions::default()).is_empty());
        let good = small("good", CriterionKind::Uacp);
        let mut bad = small("bad", CriterionKind::Alphabet);
        bad.criterion.alphabet = Some("nope".into());
        let bundle = run_grid(&[good.clone(), bad, good.clone()], &RunOptions::default());
        assert_eq!(bundle.len(), 3);
        assert_eq!(bundle.failures(), 1);
        assert!(bundle.entries[1].outcome.as_ref().unwrap_err().contains("nope"));
        let a = bundle.entries[0].outcome.as_ref().unwrap();
        let c = bundle.entries[2].outcome.as_ref().unwrap();
        assert_eq!(a.trace.power, c.trace.power);
        assert!(bundle.shares_angle_grid());
    }
}
