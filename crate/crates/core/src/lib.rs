//! Compressed sensing for co-located MIMO radar.
//!
//! The measurement matrix maps a sparse scene on the angle–delay–Doppler
//! grid to the samples recorded at `N_R` receivers when `N_T` transmitters
//! emit random probing signals. Columns from different angle classes are
//! exactly orthogonal, which makes the Gram matrix of any support block
//! diagonal; how evenly a support spreads over those classes (its
//! balancedness `η`) governs how many targets can be recovered.
//!
//! Modules:
//! - [`model`]: grid, probing signals, matrix-free operator and dense oracles.
//! - [`support`]: angle classes, balancedness, support samplers, target scenes.
//! - [`solvers`]: LASSO, debiasing least squares, basis pursuit denoising.
//! - [`analysis`]: closed-form Gram matrices, recovery conditions, restricted
//!   isometry constants, tail probes.
//! - [`experiments`]: seeded Monte Carlo harness for success-rate curves.
//! - [`io`]: text formats for instances, arrays and reports.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod rng;
pub mod solvers;
pub mod support;

pub use error::{Error, Result};
pub use model::{
    generate_signals, DopplerMode, GridIndex, LinearOperator, RadarConfig, RadarOperator,
    SignalFamily, SignalSet,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// `⟨a, b⟩ = Σ conj(a_k) b_k`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
