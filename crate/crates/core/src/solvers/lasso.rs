use rand_distr::{Distribution, StandardNormal};

use super::kkt::{certificate, hard_threshold};
use super::{soft_threshold, SolverOptions, SolverResult, StepRule};
use crate::error::{Error, Result};
use crate::model::LinearOperator;
use crate::rng::{stream, tag};
use crate::{norm2, norm_inf, C64};

/// Upper estimate of `‖A‖²` from power iteration on `A*A`.
pub fn lipschitz_estimate<O: LinearOperator + ?Sized>(op: &O, iterations: usize, seed: u64) -> f64 {
    let n = op.ncols();
    let mut rng = stream(seed, tag::POWER, &[n as u64]);
    let mut v: Vec<C64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    let mut av = vec![C64::default(); op.nrows()];
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        op.apply(&v, &mut av);
        op.apply_adjoint(&av, &mut v);
        estimate = norm2(&v);
    }
    estimate
}

/// Solve `min ½‖Ax − y‖² + λ‖x‖₁` from zero.
pub fn lasso<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    lambda: f64,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    lasso_warm(op, y, lambda, opts, None)
}

fn objective(ax: &[C64], y: &[C64], x: &[C64], lambda: f64) -> f64 {
    let fit: f64 = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum();
    0.5 * fit + lambda * x.iter().map(|v| v.norm()).sum::<f64>()
}

/// LASSO with an optional starting point.
///
/// Accelerated proximal gradient in its monotone form: an iterate is only
/// accepted when it lowers the objective, otherwise momentum is reset. The
/// step `1/L` is guarded by a sufficient-decrease test, so an underestimated
/// `L` is doubled rather than trusted. The solve stops once the KKT
/// certificate holds to `kkt_tolerance · λ`.
pub fn lasso_warm<O: LinearOperator + ?Sized>(
    op: &O,
    y: &[C64],
    lambda: f64,
    opts: &SolverOptions,
    start: Option<&[C64]>,
) -> Result<SolverResult> {
    opts.validate()?;
    let (m, n) = (op.nrows(), op.ncols());
    if y.len() != m {
        return Err(Error::domain(format!("measurement length {} does not match {m}", y.len())));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::parameter(format!("lambda must be finite and non-negative, got {lambda}")));
    }
    if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::domain("measurements contain non-finite values"));
    }
    let zero = C64::default();
    let mut x = match start {
        Some(s) if s.len() == n => s.to_vec(),
        Some(s) => return Err(Error::domain(format!("start vector length {} does not match {n}", s.len()))),
        None => vec![zero; n],
    };
    let mut aty = vec![zero; n];
    op.apply_adjoint(y, &mut aty);
    let tol = kkt_tol(lambda, norm_inf(&aty), opts);

    let mut ax = vec![zero; m];
    op.apply(&x, &mut ax);
    let mut grad = vec![zero; n];
    let mut resid = vec![zero; m];

    let mut lip = match opts.step_rule {
        StepRule::PowerIterationLipschitz => {
            opts.lipschitz_safety * lipschitz_estimate(op, opts.power_iterations, opts.seed)
        }
        StepRule::Backtracking => {
            // Rayleigh quotient of A*A at A*y is a lower bound on ‖A‖².
            let mut t = vec![zero; m];
            op.apply(&aty, &mut t);
            let d = norm2(&aty);
            if d > 0.0 { (norm2(&t) / d).powi(2) } else { 1.0 }
        }
    };
    if !(lip > 0.0) {
        lip = 1.0;
    }

    let mut f_x = objective(&ax, y, &x, lambda);
    let mut history = Vec::new();
    if opts.record_objective {
        history.push(f_x);
    }
    let mut z = x.clone();
    let mut az = ax.clone();
    let mut u = vec![zero; n];
    let mut au = vec![zero; m];
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    // Certificate at the start covers λ ≥ ‖A*y‖∞ and exact warm starts.
    let mut report = certificate(op, y, lambda, &x, &ax, &mut grad, &mut resid);
    if report.passes(tol) {
        converged = true;
    }

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        for ((r, a), b) in resid.iter_mut().zip(&az).zip(y) {
            *r = a - b;
        }
        op.apply_adjoint(&resid, &mut grad);
        let f_z = 0.5 * resid.iter().map(|v| v.norm_sqr()).sum::<f64>();
        loop {
            let step = 1.0 / lip;
            for ((ui, &zi), &gi) in u.iter_mut().zip(&z).zip(&grad) {
                *ui = soft_threshold(zi - gi * step, lambda * step);
            }
            op.apply(&u, &mut au);
            let f_u = 0.5 * au.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            let mut lin = 0.0;
            let mut quad = 0.0;
            for ((&ui, &zi), &gi) in u.iter().zip(&z).zip(&grad) {
                let d = ui - zi;
                lin += (gi.conj() * d).re;
                quad += d.norm_sqr();
            }
            let bound = f_z + lin + 0.5 * lip * quad;
            if f_u <= bound + 1e-12 * (f_z.abs() + 1.0) {
                break;
            }
            lip *= 2.0;
        }
        let f_u = objective(&au, y, &u, lambda);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut change = 0.0;
        let x_norm;
        if f_u <= f_x {
            let beta = (t - 1.0) / t_next;
            for ((zi, xi), &ui) in z.iter_mut().zip(x.iter_mut()).zip(&u) {
                let d = ui - *xi;
                change += d.norm_sqr();
                *zi = ui + d * beta;
                *xi = ui;
            }
            for ((azi, axi), &aui) in az.iter_mut().zip(ax.iter_mut()).zip(&au) {
                let d = aui - *axi;
                *azi = aui + d * beta;
                *axi = aui;
            }
            f_x = f_u;
            t = t_next;
            x_norm = norm2(&x);
        } else {
            // Rejected step: restart momentum from the current iterate.
            z.copy_from_slice(&x);
            az.copy_from_slice(&ax);
            t = 1.0;
            x_norm = norm2(&x);
            change = f64::INFINITY;
        }
        if opts.record_objective {
            history.push(f_x);
        }
        let stalled = change.sqrt() <= opts.relative_tolerance * x_norm;
        if stalled || iterations % opts.check_every == 0 || iterations == opts.max_iterations {
            report = certificate(op, y, lambda, &x, &ax, &mut grad, &mut resid);
            if report.passes(tol) {
                converged = true;
            }
        }
    }

    // Residual from a fresh product rather than the tracked one.
    op.apply(&x, &mut ax);
    let residual_norm = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let final_objective = objective(&ax, y, &x, lambda);
    report = certificate(op, y, lambda, &x, &ax, &mut grad, &mut resid);
    converged = converged && report.passes(tol);
    log::debug!(
        "lasso: lambda={lambda:.4e} iterations={iterations} objective={final_objective:.6e} converged={converged}"
    );
    Ok(SolverResult {
        support: hard_threshold(&x, opts.support_threshold),
        x_hat: x,
        iterations,
        final_objective,
        residual_norm,
        converged,
        lambda,
        kkt: report,
        objective_history: history,
    })
}

/// Absolute KKT tolerance: relative to `λ`, floored at the rounding level of `A*y`.
pub(crate) fn kkt_tol(lambda: f64, aty_inf: f64, opts: &SolverOptions) -> f64 {
    (opts.kkt_tolerance * lambda).max(1e-11 * aty_inf).max(f64::MIN_POSITIVE)
}
