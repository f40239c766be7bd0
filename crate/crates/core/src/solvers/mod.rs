//! Sparse recovery: LASSO, debiasing least squares and basis pursuit denoising.

mod bpdn;
mod debias;
mod kkt;
mod lasso;

pub use bpdn::basis_pursuit_denoise;
pub use debias::{debias, Debiased};
pub use kkt::{check_lasso_optimality, declare_success, hard_threshold, KktReport, SuccessReport};
pub use lasso::{lasso, lasso_warm, lipschitz_estimate};

use crate::error::Result;
use crate::model::RadarConfig;
use crate::support::SupportSet;
use crate::C64;

/// How the gradient step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// `1/L` with `L` from power iteration on `A*A` times a safety factor;
    /// a failed sufficient-decrease test still doubles `L`.
    PowerIterationLipschitz,
    /// Start from a cheap lower bound on `L` and backtrack every iteration.
    Backtracking,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Iterate stall threshold `‖x_k − x_{k−1}‖ ≤ tol ‖x_k‖` that triggers an early certificate check.
    pub relative_tolerance: f64,
    /// KKT tolerance relative to `λ`.
    pub kkt_tolerance: f64,
    pub step_rule: StepRule,
    pub power_iterations: usize,
    pub lipschitz_safety: f64,
    /// Certificate is evaluated every this many iterations.
    pub check_every: usize,
    /// Magnitudes at or below this are outside `SolverResult::support`.
    pub support_threshold: f64,
    /// Keep the objective value of every accepted iterate.
    pub record_objective: bool,
    /// Seed for the power-iteration start vector.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 5000,
            relative_tolerance: 1e-8,
            kkt_tolerance: 1e-6,
            step_rule: StepRule::PowerIterationLipschitz,
            power_iterations: 20,
            lipschitz_safety: 1.05,
            check_every: 10,
            support_threshold: 0.0,
            record_objective: false,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(crate::Error::parameter("max_iterations must be at least 1"));
        }
        if !(self.relative_tolerance > 0.0 && self.kkt_tolerance > 0.0) {
            return Err(crate::Error::parameter("tolerances must be positive"));
        }
        if self.check_every == 0 || self.power_iterations == 0 {
            return Err(crate::Error::parameter("check_every and power_iterations must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a LASSO or BPDN solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub x_hat: Vec<C64>,
    pub iterations: usize,
    /// LASSO objective `½‖Ax − y‖² + λ‖x‖₁` (for BPDN: `‖x‖₁`).
    pub final_objective: f64,
    /// `‖A x_hat − y‖₂`, recomputed from `x_hat`.
    pub residual_norm: f64,
    pub converged: bool,
    /// Regularisation parameter of the returned point.
    pub lambda: f64,
    /// Linear indices with `|x_hat| > support_threshold`.
    pub support: Vec<usize>,
    pub kkt: KktReport,
    /// Objective of each accepted iterate when requested.
    pub objective_history: Vec<f64>,
}

impl SolverResult {
    pub fn recovered_support(&self, cfg: &RadarConfig) -> Result<SupportSet> {
        SupportSet::from_linear(cfg, self.support.iter().copied())
    }
}

/// `λ = 2σ √(2 N_T N_R N_t ln N)` with `N` the grid size of the configured mode.
pub fn default_lambda(cfg: &RadarConfig, sigma: f64) -> f64 {
    2.0 * sigma * cfg.scale() * (2.0 * (cfg.grid_size() as f64).ln()).sqrt()
}

/// Complex soft thresholding, the prox of `t|·|`: `sgn(z) max(|z| − t, 0)`.
pub fn soft_threshold(z: C64, t: f64) -> C64 {
    let r = z.norm();
    if r <= t {
        C64::default()
    } else {
        z * ((r - t) / r)
    }
}
