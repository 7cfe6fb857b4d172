//! Reradiation patterns of digitally reconfigurable intelligent surfaces.
//!
//! The crate models a planar surface of `N × M` reconfigurable elements in
//! the `z = 0` plane, lit by a single-antenna transmitter and observed by a
//! single-antenna receiver in free space. Each element realizes one entry of
//! a finite alphabet of complex reflection coefficients. The modules cover:
//!
//! * [`geometry`]: element grid, carrier, terminals and phase conventions.
//! * [`alphabet`]: measured and idealized reflection-coefficient alphabets.
//! * [`channel`]: cascaded free-space coefficients and received power.
//! * [`designer`]: phase-matching designs and alternating optimization.
//! * [`pattern`]: angular sweeps, interference illumination, beam metrics.
//! * [`scenario`]: declarative experiment definitions and batch runs.
//! * [`export`]: CSV traces and colour-map matrices.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alphabet;
pub mod channel;
pub mod designer;
pub mod error;
pub mod export;
pub mod geometry;
pub mod pattern;
pub mod scenario;

pub use num_complex::Complex64;

pub use alphabet::{builtin, constellation_stats, load_alphabet, uadp_set, Alphabet};
pub use channel::{achievable_rate, received_power, ChannelPair};
pub use designer::{
    design, optimize_alternating, DesignCriterion, OptimizerOptions, OptimizerReport,
    SurfaceConfig,
};
pub use error::{Error, Result};
pub use geometry::{Coefficient, GainPattern, RisGeometry, Terminal, Wave};
pub use pattern::{extract_metrics, sweep, BeamMetrics, PatternTrace, SweepSpec};
pub use scenario::{run_grid, run_scenario, Scenario, TraceBundle};
