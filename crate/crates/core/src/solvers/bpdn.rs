use nalgebra::{DMatrix, DVector};

use super::kkt::hard_threshold;
use super::lasso::lasso_warm;
use super::{KktReport, SolverOptions, SolverResult};
use crate::analysis::SINGULAR_CONDITION;
use crate::error::{Error, Result};
use crate::model::LinearOperator;
use crate::{norm2, norm_inf, C64};

/// Solve `min ‖z‖₁` subject to `‖Az − y‖₂ ≤ ρ`.
///
/// Walks the LASSO path: `λ` descends geometrically from `‖A*y‖∞` until the
/// residual drops below `ρ`, then bisects (in `log λ`) until the residual is
/// within `max(1e-4 ‖y‖, 1e-8)` of `ρ`. Each solve is warm-started from the
/// previous one. For `ρ = 0` the path is followed towards `λ → 0`, and at each
/// stage the least-squares fit on the current support is tried; it is accepted
/// once it interpolates `y` to `1e-6 ‖y‖` without flipping any phase.
pub fn basis_pursuit_denoise<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    rho: f64,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    opts.validate()?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::parameter(format!("rho must be finite and non-negative, got {rho}")));
    }
    if y.len() != op.nrows() {
        return Err(Error::domain(format!("measurement length {} does not match {}", y.len(), op.nrows())));
    }
    let n = op.ncols();
    let y_norm = norm2(y);
    let mut aty = vec![C64::default(); n];
    op.apply_adjoint(y, &mut aty);
    let lambda_max = norm_inf(&aty);
    if rho >= y_norm || lambda_max == 0.0 {
        return Ok(SolverResult {
            x_hat: vec![C64::default(); n],
            iterations: 0,
            final_objective: 0.0,
            residual_norm: y_norm,
            converged: rho >= y_norm,
            lambda: lambda_max,
            support: Vec::new(),
            kkt: KktReport { off_support: 0.0, on_support: 0.0 },
            objective_history: Vec::new(),
        });
    }
    if rho == 0.0 {
        return interpolate(op, y, y_norm, lambda_max, opts);
    }

    let tol = (1e-4 * y_norm).max(1e-8);
    let mut total = 0;
    let mut hi = lambda_max;
    let mut warm: Option<Vec<C64>> = None;
    let mut lambda = lambda_max;
    let mut lo_result = None;
    while lambda > 1e-14 * lambda_max {
        lambda *= 0.1;
        let r = lasso_warm(op, y, lambda, opts, warm.as_deref())?;
        total += r.iterations;
        if (r.residual_norm - rho).abs() <= tol {
            let ok = r.converged;
            return Ok(finish(r, total, ok));
        }
        if r.residual_norm < rho {
            lo_result = Some(r);
            break;
        }
        hi = lambda;
        warm = Some(r.x_hat);
    }
    let Some(mut lo) = lo_result else {
        return Err(Error::parameter(format!("residual bound {rho:e} is below what the LASSO path reaches")));
    };
    for _ in 0..100 {
        let mid = (lo.lambda * hi).sqrt();
        let r = lasso_warm(op, y, mid, opts, warm.as_deref().or(Some(&lo.x_hat)))?;
        total += r.iterations;
        if (r.residual_norm - rho).abs() <= tol {
            let ok = r.converged;
            return Ok(finish(r, total, ok));
        }
        if r.residual_norm < rho {
            lo = r;
        } else {
            hi = mid;
            warm = Some(r.x_hat);
        }
        if hi / lo.lambda < 1.0 + 1e-12 {
            break;
        }
    }
    log::warn!("bpdn: bisection did not reach the residual target");
    Ok(finish(lo, total, false))
}

fn finish(mut r: SolverResult, iterations: usize, converged: bool) -> SolverResult {
    r.iterations = iterations;
    r.final_objective = r.x_hat.iter().map(|v| v.norm()).sum();
    r.converged = converged;
    r
}

fn interpolate<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    y_norm: f64,
    lambda_max: f64,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    let target = 1e-6 * y_norm;
    let mut total = 0;
    let mut lambda = lambda_max;
    let mut warm: Option<Vec<C64>> = None;
    let mut last = None;
    while lambda > 1e-12 * lambda_max {
        lambda *= 0.1;
        let mut r = lasso_warm(op, y, lambda, opts, warm.as_deref())?;
        total += r.iterations;
        if r.residual_norm <= target {
            return Ok(finish(r, total, true));
        }
        let peak = norm_inf(&r.x_hat);
        let support = hard_threshold(&r.x_hat, 1e-9 * peak);
        if !support.is_empty() && support.len() <= op.nrows() {
            if let Some(z) = support_least_squares(op, y, &support) {
                let same_phase = support
                    .iter()
                    .zip(&z)
                    .all(|(&k, zk)| (r.x_hat[k].conj() * zk).re > 0.0);
                let mut x = vec![C64::default(); op.ncols()];
                for (&k, &v) in support.iter().zip(&z) {
                    x[k] = v;
                }
                let mut ax = vec![C64::default(); op.nrows()];
                op.apply(&x, &mut ax);
                let resid = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                if same_phase && resid <= target {
                    log::debug!("bpdn: interpolating fit on {} columns at lambda={lambda:.3e}", support.len());
                    r.x_hat = x;
                    r.residual_norm = resid;
                    r.support = hard_threshold(&r.x_hat, opts.support_threshold);
                    return Ok(finish(r, total, true));
                }
            }
        }
        warm = Some(r.x_hat.clone());
        last = Some(r);
    }
    log::warn!("bpdn: path did not interpolate the measurements");
    let r = last.ok_or_else(|| Error::parameter("empty path"))?;
    Ok(finish(r, total, false))
}

/// Least squares on the columns `support` of `op`; `None` when rank deficient.
fn support_least_squares<O: LinearOperator + ?Sized>(op: &O, y: &[C64], support: &[usize]) -> Option<Vec<C64>> {
    let m = op.nrows();
    let mut unit = vec![C64::default(); op.ncols()];
    let mut cols = DMatrix::<C64>::zeros(m, support.len());
    let mut buf = vec![C64::default(); m];
    for (c, &k) in support.iter().enumerate() {
        unit[k] = C64::new(1.0, 0.0);
        op.apply(&unit, &mut buf);
        unit[k] = C64::default();
        cols.column_mut(c).copy_from_slice(&buf);
    }
    let gram = cols.adjoint() * &cols;
    let ev = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo > 0.0) || hi / lo > SINGULAR_CONDITION {
        return None;
    }
    let rhs = cols.adjoint() * DVector::from_column_slice(y);
    let z = gram.cholesky()?.solve(&rhs);
    Some(z.iter().copied().collect())
}
