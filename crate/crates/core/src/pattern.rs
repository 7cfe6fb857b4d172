//! Angular reradiation patterns.
//!
//! A receiver is moved along an arc in the `xz` plane (azimuth 0) at a fixed
//! radius and the received power is evaluated at every angle with the
//! configuration held fixed. Both channel legs are recomputed per angle,
//! since the transmitter leg's patch factor depends on the receiver.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::field_at;
use crate::designer::SurfaceConfig;
use crate::error::{Error, Result};
use crate::geometry::{GainPattern, RisGeometry, Role, Terminal, Wave};

/// Fraunhofer distance `2D²/λ` with `D` the aperture diagonal.
pub fn fraunhofer_distance(geom: &RisGeometry, wave: &Wave) -> f64 {
    let d = geom.diagonal();
    2.0 * d * d / wave.wavelength()
}

/// Default far-field range, four times the Fraunhofer distance.
pub fn far_field_radius(geom: &RisGeometry, wave: &Wave) -> f64 {
    4.0 * fraunhofer_distance(geom, wave)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RadiusMode {
    FarField,
    Fixed { radius_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub step: f64,
    pub radius: RadiusMode,
    pub rx_gain: GainPattern,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            theta_min: -90.0,
            theta_max: 90.0,
            step: 0.1,
            radius: RadiusMode::FarField,
            rx_gain: GainPattern::Isotropic,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min < self.theta_max) {
            return Err(Error::contract(format!(
                "sweep range [{}, {}] is empty",
                self.theta_min, self.theta_max
            )));
        }
        if self.theta_min < -90.0 || self.theta_max > 90.0 {
            return Err(Error::contract("sweep angles must lie within [−90°, 90°]"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::contract(format!("sweep step must be positive, got {}", self.step)));
        }
        if let RadiusMode::Fixed { radius_m } = self.radius {
            if !(radius_m > 0.0 && radius_m.is_finite()) {
                return Err(Error::contract(format!("sweep radius must be positive, got {radius_m}")));
            }
        }
        Ok(())
    }

    /// Angle grid `θ_min + i·step`, inclusive of `θ_max` when it falls on
    /// the grid.
    pub fn angles(&self) -> Vec<f64> {
        let count = ((self.theta_max - self.theta_min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.theta_min + i as f64 * self.step).collect()
    }

    pub fn resolve_radius(&self, geom: &RisGeometry, wave: &Wave) -> f64 {
        match self.radius {
            RadiusMode::FarField => far_field_radius(geom, wave),
            RadiusMode::Fixed { radius_m } => {
                let limit = fraunhofer_distance(geom, wave);
                if radius_m < limit {
                    log::warn!(
                        "receiver radius {radius_m:.3} m is inside the Fraunhofer distance {limit:.3} m (near field)"
                    );
                }
                radius_m
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TraceMeta {
    pub criterion: String,
    pub grid: (usize, usize),
    pub pitch_m: (f64, f64),
    pub frequency_hz: f64,
    pub tx_position: [f64; 3],
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternTrace {
    pub angles: Vec<f64>,
    pub power: Vec<f64>,
    pub power_db_normalized: Vec<f64>,
    pub meta: TraceMeta,
}

/// `10·log10(p/max)`; exactly 0 dB at the maximum.
pub fn normalize_db(power: &[f64]) -> Vec<f64> {
    let max = power.iter().copied().fold(0.0, f64::max);
    power
        .iter()
        .map(|&p| if max > 0.0 { 10.0 * (p / max).log10() } else { 0.0 })
        .collect()
}

impl PatternTrace {
    pub fn from_samples(angles: Vec<f64>, power: Vec<f64>, meta: TraceMeta) -> Result<Self> {
        if angles.len() != power.len() {
            return Err(Error::contract("angle and power lengths differ"));
        }
        let power_db_normalized = normalize_db(&power);
        Ok(Self { angles, power, power_db_normalized, meta })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

fn map_angles<F>(angles: &[f64], f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        angles.par_iter().map(|&a| f(a)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        angles.iter().map(|&a| f(a)).collect()
    }
}

fn sweep_gamma(
    geom: &RisGeometry,
    wave: &Wave,
    tx: &Terminal,
    gamma: &Array2<Complex64>,
    spec: &SweepSpec,
    p_tx: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    spec.validate()?;
    if gamma.dim() != geom.shape() {
        return Err(Error::contract(format!(
            "configuration {:?} does not match grid {:?}",
            gamma.dim(),
            geom.shape()
        )));
    }
    let radius = spec.resolve_radius(geom, wave);
    let angles = spec.angles();
    let rx_gain = spec.rx_gain;
    let power = map_angles(&angles, |theta| {
        let rx = Terminal::in_xz_plane(radius, theta, rx_gain, Role::Rx).expect("z > 0 on the arc");
        p_tx * field_at(geom, wave, tx, &rx, gamma).norm_sqr()
    });
    Ok((angles, power, radius))
}

/// Received power versus observation angle for a fixed configuration.
pub fn sweep(
    geom: &RisGeometry,
    wave: &Wave,
    tx: &Terminal,
    config: &SurfaceConfig,
    spec: &SweepSpec,
    p_tx: f64,
) -> Result<PatternTrace> {
    let (angles, power, radius) = sweep_gamma(geom, wave, tx, config.gamma(), spec, p_tx)?;
    let meta = TraceMeta {
        criterion: config.criterion().label(),
        grid: geom.shape(),
        pitch_m: (geom.pitch_x(), geom.pitch_y()),
        frequency_hz: wave.frequency(),
        tx_position: tx.position(),
        radius_m: radius,
    };
    PatternTrace::from_samples(angles, power, meta)
}

/// Pattern of a frozen configuration lit from `interferer_theta_deg` instead
/// of the nominal transmitter. The interferer sits at the nominal
/// transmitter's range, in the `xz` plane, with its gain pattern.
pub fn interference_study(
    geom: &RisGeometry,
    wave: &Wave,
    nominal_tx: &Terminal,
    config: &SurfaceConfig,
    interferer_theta_deg: f64,
    spec: &SweepSpec,
    p_tx: f64,
) -> Result<PatternTrace> {
    if !(interferer_theta_deg > -90.0 && interferer_theta_deg < 90.0) {
        return Err(Error::contract(format!(
            "interferer angle must lie in (−90°, 90°), got {interferer_theta_deg}"
        )));
    }
    let interferer =
        Terminal::in_xz_plane(nominal_tx.range(), interferer_theta_deg, nominal_tx.gain(), Role::Tx)?;
    sweep(geom, wave, &interferer, config, spec, p_tx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe {
    pub angle: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamMetrics {
    pub peak_angle: f64,
    pub peak_power: f64,
    /// All strict interior local maxima, strongest first. Includes the main
    /// lobe when the global peak is interior.
    pub lobes: Vec<Lobe>,
    angles: Vec<f64>,
    power: Vec<f64>,
}

impl BeamMetrics {
    /// Local maxima other than the global peak, strongest first.
    pub fn sidelobes(&self) -> Vec<Lobe> {
        let mut skipped = false;
        self.lobes
            .iter()
            .filter(|l| {
                if !skipped && l.angle == self.peak_angle {
                    skipped = true;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect()
    }

    /// Strongest sidelobe relative to the peak, in dB (≤ 0); `−∞` without
    /// sidelobes.
    pub fn peak_sidelobe_level_db(&self) -> f64 {
        match self.sidelobes().first() {
            Some(l) if self.peak_power > 0.0 => 10.0 * (l.power / self.peak_power).log10(),
            _ => f64::NEG_INFINITY,
        }
    }

    /// Linearly interpolated power at `angle`; `None` outside the sampled
    /// range.
    pub fn power_at(&self, angle: f64) -> Option<f64> {
        let first = *self.angles.first()?;
        let last = *self.angles.last()?;
        if angle < first || angle > last {
            return None;
        }
        let i = self.angles.partition_point(|&a| a <= angle);
        if i == 0 {
            return Some(self.power[0]);
        }
        if i >= self.angles.len() {
            return Some(self.power[self.angles.len() - 1]);
        }
        let (a0, a1) = (self.angles[i - 1], self.angles[i]);
        let t = (angle - a0) / (a1 - a0);
        Some(self.power[i - 1] + t * (self.power[i] - self.power[i - 1]))
    }

    /// Highest sample within `center ± half_width` degrees.
    pub fn peak_in_window(&self, center: f64, half_width: f64) -> Option<Lobe> {
        self.angles
            .iter()
            .zip(&self.power)
            .filter(|(a, _)| (**a - center).abs() <= half_width)
            .fold(None, |best: Option<Lobe>, (&angle, &power)| match best {
                Some(b) if b.power >= power => Some(b),
                _ => Some(Lobe { angle, power }),
            })
    }
}

pub fn extract_metrics(trace: &PatternTrace) -> Result<BeamMetrics> {
    let p = &trace.power;
    if p.len() < 3 {
        return Err(Error::contract(format!("need at least 3 samples, got {}", p.len())));
    }
    let (peak_idx, peak_power) = p
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, v)| if v > bp { (i, v) } else { (bi, bp) });
    let mut lobes: Vec<Lobe> = (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] > p[i + 1])
        .map(|i| Lobe { angle: trace.angles[i], power: p[i] })
        .collect();
    lobes.sort_by(|a, b| b.power.total_cmp(&a.power));
    Ok(BeamMetrics {
        peak_angle: trace.angles[peak_idx],
        peak_power,
        lobes,
        angles: trace.angles.clone(),
        power: p.clone(),
    })
}
