use super::lasso::kkt_tol;
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::model::LinearOperator;
use crate::{norm_inf, C64};

/// KKT certificate of a LASSO point, with `g = A*(A x − y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// `max |g_Θ| − λ` over zero coordinates (`-λ` when there are none).
    pub off_support: f64,
    /// `max |g_Θ + λ sgn(x_Θ)|` over the support (0 when empty).
    pub on_support: f64,
}

impl KktReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.off_support <= tolerance && self.on_support <= tolerance
    }
}

pub(crate) fn certificate<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    lambda: f64,
    x: &[C64],
    ax: &[C64],
    grad: &mut [C64],
    resid: &mut [C64],
) -> KktReport {
    for ((r, a), b) in resid.iter_mut().zip(ax).zip(y) {
        *r = a - b;
    }
    op.apply_adjoint(resid, grad);
    let mut off = -lambda;
    let mut on = 0.0f64;
    for (&xi, &gi) in x.iter().zip(grad.iter()) {
        let r = xi.norm();
        if r == 0.0 {
            off = off.max(gi.norm() - lambda);
        } else {
            on = on.max((gi + xi * (lambda / r)).norm());
        }
    }
    KktReport { off_support: off, on_support: on }
}

/// Evaluate the KKT certificate of `x` for the LASSO with data `y` and `λ`.
///
/// Returns the report and whether it passes at `kkt_tolerance · λ`, floored
/// at rounding level for very small `λ`.
pub fn check_lasso_optimality<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    lambda: f64,
    x: &[C64],
    opts: &SolverOptions,
) -> Result<(KktReport, bool)> {
    if y.len() != op.nrows() || x.len() != op.ncols() {
        return Err(Error::domain("vector lengths do not match the operator"));
    }
    let mut ax = vec![C64::default(); op.nrows()];
    op.apply(x, &mut ax);
    let mut grad = vec![C64::default(); op.ncols()];
    let mut resid = vec![C64::default(); op.nrows()];
    let report = certificate(op, y, lambda, x, &ax, &mut grad, &mut resid);
    let mut aty = vec![C64::default(); op.ncols()];
    op.apply_adjoint(y, &mut aty);
    let ok = report.passes(kkt_tol(lambda, norm_inf(&aty), opts));
    Ok((report, ok))
}

/// Linear indices with `|x_k| > threshold`.
pub fn hard_threshold(x: &[C64], threshold: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > threshold)
        .map(|(k, _)| k)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessReport {
    /// `‖x − x_hat‖∞ ≤ threshold`.
    pub success: bool,
    pub linf_error: f64,
    /// Hard-thresholding `x_hat` at `threshold` gives exactly `supp(x)`.
    pub support_exact: bool,
}

/// Compare a recovered vector with the dense ground truth.
pub fn declare_success(x_true: &[C64], x_hat: &[C64], threshold: f64) -> Result<SuccessReport> {
    if x_true.len() != x_hat.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} vs {}",
            x_true.len(),
            x_hat.len()
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::parameter(format!("threshold must be positive, got {threshold}")));
    }
    let linf_error = x_true
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let support_exact = x_true
        .iter()
        .zip(x_hat)
        .all(|(a, b)| (*a != C64::default()) == (b.norm() > threshold));
    Ok(SuccessReport { success: linf_error <= threshold, linf_error, support_exact })
}
