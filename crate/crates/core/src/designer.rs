//! Surface configurations.
//!
//! Closed-form designs co-phase every element term `g_nm·γ_nm·h_nm` to the
//! extent the admissible phases allow. The alternating optimizer handles
//! arbitrary finite alphabets with coupled amplitude and phase: it updates
//! one element at a time, picking the alphabet entry that maximizes
//!
//! ```text
//! |Γ_l|²·|g h|² + 2·Re{Γ_l·g h·α*}
//! ```
//!
//! where `α` is the sum over all other elements. Every update is a coordinate
//! ascent step, so the objective never decreases.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

use crate::alphabet::{uadp_set, Alphabet};
use crate::channel::{pairwise_sum, ChannelPair};
use crate::error::{Error, Result};
use crate::geometry::{canonical_phase, RisGeometry, Terminal};

#[derive(Debug, Clone, PartialEq)]
pub enum DesignCriterion {
    /// Unit amplitude, continuous phase.
    Uacp,
    /// Unit amplitude, `L` evenly spaced phases.
    Uadp { levels: usize },
    /// Unit amplitude, phases of a measured alphabet.
    Uaep(Alphabet),
    /// The measured alphabet itself (amplitude and phase), via alternating
    /// optimization.
    Alphabet(Alphabet),
    Specular,
    Diffuser { seed: u64 },
}

impl DesignCriterion {
    pub fn label(&self) -> String {
        match self {
            DesignCriterion::Uacp => "UACP".into(),
            DesignCriterion::Uadp { levels } => format!("UADP(L={levels})"),
            DesignCriterion::Uaep(a) => format!("UAEP({})", a.label()),
            DesignCriterion::Alphabet(a) => format!("Alphabet({})", a.label()),
            DesignCriterion::Specular => "Specular".into(),
            DesignCriterion::Diffuser { seed } => format!("Diffuser(seed={seed})"),
        }
    }

    /// The finite set every coefficient must belong to, if any.
    pub fn feasible_set(&self) -> Result<Option<Vec<Complex64>>> {
        Ok(match self {
            DesignCriterion::Uadp { levels } => Some(uadp_set(*levels)?.values().to_vec()),
            DesignCriterion::Uaep(a) => Some(unit_values(&a.phases())),
            DesignCriterion::Alphabet(a) => Some(a.values().to_vec()),
            _ => None,
        })
    }
}

fn unit_values(phases: &[f64]) -> Vec<Complex64> {
    phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTarget {
    pub tx: Terminal,
    pub rx: Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    gamma: Array2<Complex64>,
    criterion: DesignCriterion,
    alphabet_indices: Option<Array2<usize>>,
    target: Option<DesignTarget>,
}

/// Slack on `|γ| ≤ 1` for unit phasors built with `from_polar`.
const AMPLITUDE_SLACK: f64 = 1e-12;

impl SurfaceConfig {
    pub fn new(gamma: Array2<Complex64>, criterion: DesignCriterion) -> Result<Self> {
        if let Some(((n, m), v)) = gamma.indexed_iter().find(|(_, v)| !(v.norm() <= 1.0 + AMPLITUDE_SLACK)) {
            return Err(Error::contract(format!("|γ| = {} at ({}, {}) exceeds one", v.norm(), n + 1, m + 1)));
        }
        Ok(Self { gamma, criterion, alphabet_indices: None, target: None })
    }

    fn from_indices(
        indices: Array2<usize>,
        values: &[Complex64],
        criterion: DesignCriterion,
        target: Option<DesignTarget>,
    ) -> Result<Self> {
        let gamma = indices.mapv(|i| values[i]);
        let mut cfg = Self::new(gamma, criterion)?;
        cfg.alphabet_indices = Some(indices);
        cfg.target = target;
        Ok(cfg)
    }

    pub fn gamma(&self) -> &Array2<Complex64> {
        &self.gamma
    }

    pub fn criterion(&self) -> &DesignCriterion {
        &self.criterion
    }

    pub fn alphabet_indices(&self) -> Option<&Array2<usize>> {
        self.alphabet_indices.as_ref()
    }

    pub fn target(&self) -> Option<&DesignTarget> {
        self.target.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.gamma.dim()
    }

    /// Phase matrix in degrees, canonical range.
    pub fn phases_degrees(&self) -> Array2<f64> {
        self.gamma.mapv(|c| if c.norm() == 0.0 { 0.0 } else { c.arg().to_degrees() })
    }

    pub fn amplitudes(&self) -> Array2<f64> {
        self.gamma.mapv(|c| c.norm())
    }

    /// Checks amplitude bounds, feasible-set membership and index consistency.
    pub fn validate(&self) -> Result<()> {
        if self.gamma.iter().any(|v| !(v.norm() <= 1.0 + AMPLITUDE_SLACK)) {
            return Err(Error::contract("coefficient amplitude exceeds one"));
        }
        if let Some(set) = self.criterion.feasible_set()? {
            if let Some(((n, m), _)) = self.gamma.indexed_iter().find(|(_, v)| !set.contains(v)) {
                return Err(Error::contract(format!(
                    "γ at ({}, {}) is not a member of the {} set",
                    n + 1,
                    m + 1,
                    self.criterion.label()
                )));
            }
            if let Some(idx) = &self.alphabet_indices {
                if idx.dim() != self.gamma.dim()
                    || idx.iter().zip(self.gamma.iter()).any(|(&i, v)| set.get(i) != Some(v))
                {
                    return Err(Error::contract("alphabet indices disagree with γ"));
                }
            }
        }
        Ok(())
    }
}

/// Co-phased design: `|γ| = 1`, `∠γ = −∠g − ∠h`.
pub fn design_uacp(pair: &ChannelPair) -> SurfaceConfig {
    let gamma = ndarray::Zip::from(pair.g())
        .and(pair.h())
        .map_collect(|g, h| Complex64::from_polar(1.0, uacp_phase(*g, *h)));
    let mut cfg = SurfaceConfig::new(gamma, DesignCriterion::Uacp).expect("unit phasors");
    cfg.target = Some(DesignTarget { tx: *pair.tx(), rx: *pair.rx() });
    cfg
}

fn uacp_phase(g: Complex64, h: Complex64) -> f64 {
    canonical_phase(-g.arg() - h.arg())
}

/// Index of the candidate phase closest (circularly) to `target`; ties go to
/// the lowest index.
pub fn nearest_phase(phases: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, &p) in phases.iter().enumerate() {
        let d = canonical_phase(p - target).abs();
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    best
}

/// Unit-amplitude design restricted to `phases`: each element takes the
/// candidate nearest to its co-phasing target.
pub fn design_quantized(
    pair: &ChannelPair,
    phases: &[f64],
    criterion: DesignCriterion,
) -> Result<SurfaceConfig> {
    if phases.is_empty() {
        return Err(Error::contract("quantized design needs at least one phase"));
    }
    let indices = ndarray::Zip::from(pair.g())
        .and(pair.h())
        .map_collect(|g, h| nearest_phase(phases, uacp_phase(*g, *h)));
    SurfaceConfig::from_indices(
        indices,
        &unit_values(phases),
        criterion,
        Some(DesignTarget { tx: *pair.tx(), rx: *pair.rx() }),
    )
}

pub fn design_uadp(pair: &ChannelPair, levels: usize) -> Result<SurfaceConfig> {
    let set = uadp_set(levels)?;
    design_quantized(pair, &set.phases(), DesignCriterion::Uadp { levels })
}

pub fn design_uaep(pair: &ChannelPair, alphabet: &Alphabet) -> Result<SurfaceConfig> {
    design_quantized(pair, &alphabet.phases(), DesignCriterion::Uaep(alphabet.clone()))
}

/// Every element set to `1 + 0j`: a flat mirror.
pub fn design_specular(geom: &RisGeometry) -> SurfaceConfig {
    SurfaceConfig::new(Array2::from_elem(geom.shape(), Complex64::new(1.0, 0.0)), DesignCriterion::Specular)
        .expect("unit entries")
}

/// Unit amplitude, i.i.d. uniform phases on `(−π, π]` from a seeded ChaCha8
/// stream, filled row-major.
pub fn design_diffuser(geom: &RisGeometry, seed: u64) -> SurfaceConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Array2::from_shape_simple_fn(geom.shape(), || {
        let u: f64 = rng.gen();
        Complex64::from_polar(1.0, PI - TAU * u)
    });
    SurfaceConfig::new(gamma, DesignCriterion::Diffuser { seed }).expect("unit phasors")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    /// All elements at `Γ_1`.
    FirstEntry,
    /// Independent uniform picks from a seeded generator.
    Random(u64),
    /// Explicit alphabet indices, e.g. a previous run's output.
    Indices(Array2<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    pub init: Initialization,
    /// Absolute tolerance on `|F(k) − F(k−1)|`; `None` means `1e-6·F(0)`.
    pub epsilon: Option<f64>,
    pub max_sweeps: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { init: Initialization::FirstEntry, epsilon: None, max_sweeps: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    /// Completed sweeps over all elements.
    pub iterations: usize,
    /// `F(0), F(1), …`; one value per sweep after the initial one.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub tolerance_used: f64,
    /// Element updates that changed the chosen entry.
    pub element_update_count: usize,
    /// Candidate evaluations, `iterations·N·M·L`.
    pub evaluations: usize,
}

impl OptimizerReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds F(0)")
    }

    pub fn is_monotone(&self) -> bool {
        self.objective_trace.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Objective `|Σ g γ h|²` of a given index assignment.
pub fn objective(cascaded: &[Complex64], values: &[Complex64], indices: &[usize]) -> f64 {
    let terms: Vec<Complex64> = cascaded.iter().zip(indices).map(|(a, &i)| a * values[i]).collect();
    pairwise_sum(&terms).norm_sqr()
}

/// Entry maximizing the element's share of the objective. The current entry
/// is kept unless another is strictly better; among strictly better ones,
/// ties go to the lowest index.
fn best_entry(values: &[Complex64], sq_amps: &[f64], a: Complex64, alpha: Complex64, current: usize) -> usize {
    let a_sq = a.norm_sqr();
    let cross = a * alpha.conj();
    let score = |l: usize| sq_amps[l] * a_sq + 2.0 * (values[l] * cross).re;
    let mut best = current;
    let mut best_val = score(current);
    for l in 0..values.len() {
        let val = score(l);
        if val > best_val {
            best = l;
            best_val = val;
        }
    }
    best
}

/// Alternating (coordinate-ascent) maximization of `|Σ g γ h|²` over
/// `γ_nm ∈ alphabet`.
///
/// Sweeps visit elements row-major. The running sum is updated in place per
/// element and recomputed from scratch after each sweep. Iteration stops when
/// a sweep changes no element (a coordinate-wise fixed point), when
/// `|F(k) − F(k−1)| ≤ ε` after at least one sweep, or after `max_sweeps`
/// with `converged = false`.
pub fn optimize_alternating(
    pair: &ChannelPair,
    alphabet: &Alphabet,
    options: &OptimizerOptions,
) -> Result<(SurfaceConfig, OptimizerReport)> {
    let shape = pair.g().dim();
    let n = shape.0 * shape.1;
    let values = alphabet.values();
    let sq_amps: Vec<f64> = values.iter().map(Complex64::norm_sqr).collect();
    let cascaded = pair.cascaded();

    let mut idx: Vec<usize> = match &options.init {
        Initialization::FirstEntry => vec![0; n],
        Initialization::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n).map(|_| rng.gen_range(0..values.len())).collect()
        }
        Initialization::Indices(m) => {
            if m.dim() != shape {
                return Err(Error::contract(format!("initial indices {:?} vs grid {:?}", m.dim(), shape)));
            }
            if m.iter().any(|&i| i >= values.len()) {
                return Err(Error::contract("initial index outside alphabet"));
            }
            m.iter().copied().collect()
        }
    };

    let f0 = objective(&cascaded, values, &idx);
    let epsilon = options.epsilon.unwrap_or(1e-6 * f0);
    if !(epsilon >= 0.0) {
        return Err(Error::contract(format!("tolerance must be ≥ 0, got {epsilon}")));
    }

    let mut trace = vec![f0];
    let mut f_prev = 0.0;
    let mut f_cur = f0;
    let mut sweeps = 0;
    let mut updates = 0;
    let mut changed = usize::MAX;
    let converged = loop {
        if sweeps > 0 && (changed == 0 || (f_cur - f_prev).abs() <= epsilon) {
            break true;
        }
        if sweeps >= options.max_sweeps {
            break false;
        }
        let mut sum = pairwise_sum(
            &cascaded.iter().zip(&idx).map(|(a, &i)| a * values[i]).collect::<Vec<_>>(),
        );
        changed = 0;
        for (a, slot) in cascaded.iter().zip(idx.iter_mut()) {
            let alpha = sum - a * values[*slot];
            let best = best_entry(values, &sq_amps, *a, alpha, *slot);
            if best != *slot {
                changed += 1;
                *slot = best;
            }
            sum = alpha + a * values[best];
        }
        updates += changed;
        sweeps += 1;
        f_prev = f_cur;
        f_cur = objective(&cascaded, values, &idx);
        trace.push(f_cur);
    };

    let indices = Array2::from_shape_vec(shape, idx).expect("shape preserved");
    let cfg = SurfaceConfig::from_indices(
        indices,
        values,
        DesignCriterion::Alphabet(alphabet.clone()),
        Some(DesignTarget { tx: *pair.tx(), rx: *pair.rx() }),
    )?;
    let report = OptimizerReport {
        iterations: sweeps,
        objective_trace: trace,
        converged,
        tolerance_used: epsilon,
        element_update_count: updates,
        evaluations: sweeps * n * values.len(),
    };
    Ok((cfg, report))
}

/// True when no single-element substitution from `alphabet` strictly
/// increases `|Σ g γ h|²`.
pub fn is_coordinate_optimal(pair: &ChannelPair, alphabet: &Alphabet, indices: &Array2<usize>) -> bool {
    let values = alphabet.values();
    let sq_amps: Vec<f64> = values.iter().map(Complex64::norm_sqr).collect();
    let cascaded = pair.cascaded();
    let idx: Vec<usize> = indices.iter().copied().collect();
    let sum = pairwise_sum(&cascaded.iter().zip(&idx).map(|(a, &i)| a * values[i]).collect::<Vec<_>>());
    cascaded.iter().zip(&idx).all(|(a, &cur)| {
        let alpha = sum - a * values[cur];
        let score = |l: usize| sq_amps[l] * a.norm_sqr() + 2.0 * (values[l] * a * alpha.conj()).re;
        let current = score(cur);
        (0..values.len()).all(|l| score(l) <= current)
    })
}

/// Designs a configuration for `pair` under `criterion`. Only the
/// `Alphabet` criterion produces an optimizer report.
pub fn design(
    criterion: &DesignCriterion,
    pair: &ChannelPair,
    options: &OptimizerOptions,
) -> Result<(SurfaceConfig, Option<OptimizerReport>)> {
    Ok(match criterion {
        DesignCriterion::Uacp => (design_uacp(pair), None),
        DesignCriterion::Uadp { levels } => (design_uadp(pair, *levels)?, None),
        DesignCriterion::Uaep(a) => (design_uaep(pair, a)?, None),
        DesignCriterion::Alphabet(a) => {
            let (cfg, report) = optimize_alternating(pair, a, options)?;
            (cfg, Some(report))
        }
        DesignCriterion::Specular => (design_specular(pair.geometry()), None),
        DesignCriterion::Diffuser { seed } => (design_diffuser(pair.geometry(), *seed), None),
    })
}
