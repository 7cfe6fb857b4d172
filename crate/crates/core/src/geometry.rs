//! Element grid, carrier and terminal types shared by every other module.
//!
//! Conventions: the surface lies in the `z = 0` plane centred at the origin,
//! rows run along `x` and columns along `y`. Public indices into the grid are
//! 1-based (`n ∈ 1..=N`, `m ∈ 1..=M`); storage is 0-based row-major. Phases
//! are radians everywhere except at I/O boundaries.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s), exact SI value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wraps a phase into `(−π, π]`. Values already in range are returned
/// untouched, so the map is idempotent bit-for-bit.
pub fn canonical_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let r = phase.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wraps a phase in degrees into `(−180, 180]`.
pub fn canonical_degrees(deg: f64) -> f64 {
    if deg > -180.0 && deg <= 180.0 {
        return deg;
    }
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Rectangular grid of `n_rows × n_cols` elements with pitches `pitch_x`,
/// `pitch_y` (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisGeometry {
    n_rows: usize,
    n_cols: usize,
    pitch_x: f64,
    pitch_y: f64,
}

impl RisGeometry {
    pub fn new(n_rows: usize, n_cols: usize, pitch_x: f64, pitch_y: f64) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::contract(format!(
                "grid must have at least one element, got {n_rows}×{n_cols}"
            )));
        }
        if !(pitch_x > 0.0 && pitch_x.is_finite() && pitch_y > 0.0 && pitch_y.is_finite()) {
            return Err(Error::contract(format!(
                "pitches must be positive and finite, got ({pitch_x}, {pitch_y})"
            )));
        }
        Ok(Self { n_rows, n_cols, pitch_x, pitch_y })
    }

    /// Square grid with equal pitch along both axes.
    pub fn square(n: usize, pitch: f64) -> Result<Self> {
        Self::new(n, n, pitch, pitch)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn pitch_x(&self) -> f64 {
        self.pitch_x
    }

    pub fn pitch_y(&self) -> f64 {
        self.pitch_y
    }

    pub fn element_count(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// Aperture extents `(N·d_x, M·d_y)` in meters.
    pub fn aperture(&self) -> (f64, f64) {
        (self.n_rows as f64 * self.pitch_x, self.n_cols as f64 * self.pitch_y)
    }

    /// Aperture diagonal `√((N d_x)² + (M d_y)²)`.
    pub fn diagonal(&self) -> f64 {
        let (ax, ay) = self.aperture();
        ax.hypot(ay)
    }

    /// `x` coordinate of row `row` (0-based).
    pub(crate) fn row_x(&self, row: usize) -> f64 {
        (row as f64 + 1.0 - (self.n_rows as f64 + 1.0) / 2.0) * self.pitch_x
    }

    /// `y` coordinate of column `col` (0-based).
    pub(crate) fn col_y(&self, col: usize) -> f64 {
        (col as f64 + 1.0 - (self.n_cols as f64 + 1.0) / 2.0) * self.pitch_y
    }

    pub fn row_coordinates(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row_x(r)).collect()
    }

    pub fn col_coordinates(&self) -> Vec<f64> {
        (0..self.n_cols).map(|c| self.col_y(c)).collect()
    }

    /// Centre `(x_n, y_m)` of element `(n, m)`, 1-based.
    pub fn element_center(&self, n: usize, m: usize) -> Result<[f64; 2]> {
        if n == 0 || n > self.n_rows || m == 0 || m > self.n_cols {
            return Err(Error::contract(format!(
                "element ({n}, {m}) outside 1..={} × 1..={}",
                self.n_rows, self.n_cols
            )));
        }
        Ok([self.row_x(n - 1), self.col_y(m - 1)])
    }
}

/// Monochromatic carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    frequency: f64,
}

impl Wave {
    pub fn new(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::contract(format!("frequency must be positive, got {frequency}")));
        }
        Ok(Self { frequency })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength()
    }
}

/// Power gain pattern of a terminal antenna as a function of the polar angle
/// measured from the surface normal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainPattern {
    #[default]
    Isotropic,
    /// `cos^q θ`, unit gain at broadside.
    CosinePower { exponent: f64 },
    /// `2(q+1)·cos^q θ`, normalized so the pattern integrates to 4π over the
    /// half space.
    NormalizedCosinePower { exponent: f64 },
}

impl GainPattern {
    pub fn gain(&self, theta: f64) -> f64 {
        match *self {
            GainPattern::Isotropic => 1.0,
            GainPattern::CosinePower { exponent } => theta.cos().max(0.0).powf(exponent),
            GainPattern::NormalizedCosinePower { exponent } => {
                2.0 * (exponent + 1.0) * theta.cos().max(0.0).powf(exponent)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GainPattern::Isotropic => Ok(()),
            GainPattern::CosinePower { exponent }
            | GainPattern::NormalizedCosinePower { exponent } => {
                if exponent >= 0.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    Err(Error::contract(format!("gain exponent must be ≥ 0, got {exponent}")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Tx,
    Rx,
}

/// A single-antenna transmitter or receiver in the half space `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    position: [f64; 3],
    gain: GainPattern,
    role: Role,
}

impl Terminal {
    pub fn new(position: [f64; 3], gain: GainPattern, role: Role) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::contract("terminal position must be finite"));
        }
        if position[2] <= 0.0 {
            return Err(Error::contract(format!(
                "terminal must lie in z > 0, got z = {}",
                position[2]
            )));
        }
        gain.validate()?;
        Ok(Self { position, gain, role })
    }

    pub fn isotropic(position: [f64; 3], role: Role) -> Result<Self> {
        Self::new(position, GainPattern::Isotropic, role)
    }

    /// Terminal in the `xz` plane at `radius` from the origin and polar angle
    /// `theta_deg` (positive towards `+x`).
    pub fn in_xz_plane(radius: f64, theta_deg: f64, gain: GainPattern, role: Role) -> Result<Self> {
        let t = theta_deg.to_radians();
        Self::new([radius * t.sin(), 0.0, radius * t.cos()], gain, role)
    }

    pub fn position(&self) -> [f64; 3] {
        self.position
    }

    pub fn gain(&self) -> GainPattern {
        self.gain
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn range(&self) -> f64 {
        let [x, y, z] = self.position;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Geometry of the path between a terminal and one element centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub distance: f64,
    /// `z_t / distance`.
    pub obliquity: f64,
    /// `arccos(obliquity)`.
    pub polar_angle: f64,
}

pub fn distance_and_angle(terminal: &Terminal, center: [f64; 2]) -> PathGeometry {
    let [x, y, z] = terminal.position;
    let dx = x - center[0];
    let dy = y - center[1];
    let distance = (dx * dx + dy * dy + z * z).sqrt();
    let obliquity = (z / distance).min(1.0);
    PathGeometry { distance, obliquity, polar_angle: obliquity.acos() }
}

/// A reflection coefficient in polar form with `amplitude ∈ [0, 1]` and a
/// canonical phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    amplitude: f64,
    phase: f64,
}

impl Coefficient {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::contract(format!(
                "reflection amplitude must lie in [0, 1], got {amplitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::contract("reflection phase must be finite"));
        }
        Ok(Self { amplitude, phase: canonical_phase(phase) })
    }

    pub fn from_degrees(amplitude: f64, phase_deg: f64) -> Result<Self> {
        Self::new(amplitude, canonical_degrees(phase_deg).to_radians())
    }

    pub fn from_db(amplitude_db: f64, phase_deg: f64) -> Result<Self> {
        Self::from_degrees(db_to_linear(amplitude_db), phase_deg)
    }

    pub fn unit(phase: f64) -> Self {
        Self { amplitude: 1.0, phase: canonical_phase(phase) }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn phase_degrees(&self) -> f64 {
        self.phase.to_degrees()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Field-quantity conversion `10^(dB/20)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
