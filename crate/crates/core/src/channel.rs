//! Cascaded free-space channel through the surface.
//!
//! Each element contributes `g_nm·γ_nm·h_nm`, where `g_nm` carries the
//! transmitter leg (spherical wave, obliquity, gain, `x` patch factor) and
//! `h_nm` the receiver leg (`y` patch factor). The patch factors mix the
//! direction cosines of both legs, so `g` depends on the receiver position
//! and `h` on the transmitter position. The received power is
//! `p·|Σ g γ h|²`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::designer::SurfaceConfig;
use crate::error::{Error, Result};
use crate::geometry::{distance_and_angle, RisGeometry, Terminal, Wave};

/// `sin(x)/x` with a series branch around zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Sums complex terms by recursive halving; rounding error grows as
/// `O(log n)` rather than `O(n)`.
pub fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 32;
    if terms.len() <= BLOCK {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in terms {
            acc += t;
        }
        return acc;
    }
    let (a, b) = terms.split_at(terms.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `(g_nm, h_nm)` for one element centre.
pub(crate) fn element_link(
    k: f64,
    pitch: (f64, f64),
    center: [f64; 2],
    tx: &Terminal,
    rx: &Terminal,
) -> (Complex64, Complex64) {
    let t = distance_and_angle(tx, center);
    let r = distance_and_angle(rx, center);
    let [xt, yt, _] = tx.position();
    let [xr, yr, _] = rx.position();
    let (dx, dy) = pitch;

    let sx = sinc(k * ((xr - center[0]) / r.distance + (xt - center[0]) / t.distance) * dx / 2.0);
    let sy = sinc(k * ((yr - center[1]) / r.distance + (yt - center[1]) / t.distance) * dy / 2.0);

    let leg = |path: &crate::geometry::PathGeometry, gain: f64| {
        Complex64::from_polar(
            gain.sqrt() * path.obliquity / path.distance / (4.0 * PI),
            -k * path.distance,
        )
    };
    let g = leg(&t, tx.gain().gain(t.polar_angle)) * (dx * sx);
    let h = leg(&r, rx.gain().gain(r.polar_angle)) * (dy * sy);
    (g, h)
}

fn link_matrices(
    geom: &RisGeometry,
    wave: &Wave,
    tx: &Terminal,
    rx: &Terminal,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let k = wave.wavenumber();
    let pitch = (geom.pitch_x(), geom.pitch_y());
    let xs = geom.row_coordinates();
    let ys = geom.col_coordinates();
    let mut g = Array2::zeros(geom.shape());
    let mut h = Array2::zeros(geom.shape());
    for (n, &x) in xs.iter().enumerate() {
        for (m, &y) in ys.iter().enumerate() {
            let (gv, hv) = element_link(k, pitch, [x, y], tx, rx);
            g[(n, m)] = gv;
            h[(n, m)] = hv;
        }
    }
    (g, h)
}

pub fn compute_g(geom: &RisGeometry, wave: &Wave, tx: &Terminal, rx: &Terminal) -> Array2<Complex64> {
    link_matrices(geom, wave, tx, rx).0
}

pub fn compute_h(geom: &RisGeometry, wave: &Wave, tx: &Terminal, rx: &Terminal) -> Array2<Complex64> {
    link_matrices(geom, wave, tx, rx).1
}

/// Channel coefficients for one fixed transmitter/receiver placement.
#[derive(Debug, Clone)]
pub struct ChannelPair {
    g: Array2<Complex64>,
    h: Array2<Complex64>,
    geometry: RisGeometry,
    wave: Wave,
    tx: Terminal,
    rx: Terminal,
}

impl ChannelPair {
    pub fn compute(geometry: &RisGeometry, wave: &Wave, tx: &Terminal, rx: &Terminal) -> Self {
        let (g, h) = link_matrices(geometry, wave, tx, rx);
        Self { g, h, geometry: *geometry, wave: *wave, tx: *tx, rx: *rx }
    }

    /// Builds a pair from explicit matrices, e.g. for synthetic channels.
    pub fn from_matrices(
        geometry: &RisGeometry,
        wave: &Wave,
        tx: &Terminal,
        rx: &Terminal,
        g: Array2<Complex64>,
        h: Array2<Complex64>,
    ) -> Result<Self> {
        if g.dim() != geometry.shape() || h.dim() != geometry.shape() {
            return Err(Error::contract(format!(
                "channel matrices {:?}/{:?} do not match grid {:?}",
                g.dim(),
                h.dim(),
                geometry.shape()
            )));
        }
        Ok(Self { g, h, geometry: *geometry, wave: *wave, tx: *tx, rx: *rx })
    }

    pub fn g(&self) -> &Array2<Complex64> {
        &self.g
    }

    pub fn h(&self) -> &Array2<Complex64> {
        &self.h
    }

    pub fn geometry(&self) -> &RisGeometry {
        &self.geometry
    }

    pub fn wave(&self) -> &Wave {
        &self.wave
    }

    pub fn tx(&self) -> &Terminal {
        &self.tx
    }

    pub fn rx(&self) -> &Terminal {
        &self.rx
    }

    /// Element-wise products `g_nm·h_nm`, row-major.
    pub fn cascaded(&self) -> Vec<Complex64> {
        self.g.iter().zip(self.h.iter()).map(|(g, h)| g * h).collect()
    }

    /// `Σ g_nm·γ_nm·h_nm` for an arbitrary coefficient matrix.
    pub fn field(&self, gamma: &Array2<Complex64>) -> Result<Complex64> {
        if gamma.dim() != self.g.dim() {
            return Err(Error::contract(format!(
                "configuration {:?} does not match channel {:?}",
                gamma.dim(),
                self.g.dim()
            )));
        }
        let terms: Vec<Complex64> = self
            .g
            .iter()
            .zip(gamma.iter())
            .zip(self.h.iter())
            .map(|((g, c), h)| g * c * h)
            .collect();
        Ok(pairwise_sum(&terms))
    }
}

/// `Σ g γ h` at a receiver without materializing the channel matrices.
pub fn field_at(
    geom: &RisGeometry,
    wave: &Wave,
    tx: &Terminal,
    rx: &Terminal,
    gamma: &Array2<Complex64>,
) -> Complex64 {
    let k = wave.wavenumber();
    let pitch = (geom.pitch_x(), geom.pitch_y());
    let xs = geom.row_coordinates();
    let ys = geom.col_coordinates();
    let mut terms = Vec::with_capacity(geom.element_count());
    for (n, &x) in xs.iter().enumerate() {
        for (m, &y) in ys.iter().enumerate() {
            let (g, h) = element_link(k, pitch, [x, y], tx, rx);
            terms.push(g * gamma[(n, m)] * h);
        }
    }
    pairwise_sum(&terms)
}

pub fn received_power(pair: &ChannelPair, config: &SurfaceConfig, p_tx: f64) -> Result<f64> {
    Ok(p_tx * pair.field(config.gamma())?.norm_sqr())
}

pub fn rate_from_power(received: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::contract(format!("noise power must be positive, got {noise_power}")));
    }
    Ok((1.0 + received / noise_power).log2())
}

/// Achievable rate in bit/s/Hz, `log2(1 + p_rx/σ²)`.
pub fn achievable_rate(
    pair: &ChannelPair,
    config: &SurfaceConfig,
    p_tx: f64,
    noise_power: f64,
) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::contract(format!("noise power must be positive, got {noise_power}")));
    }
    rate_from_power(received_power(pair, config, p_tx)?, noise_power)
}
