use nalgebra::DVector;

use crate::analysis::{gram_closed_form, hermitian_eigenvalues, SINGULAR_CONDITION};
use crate::error::{Error, Result};
use crate::model::RadarOperator;
use crate::support::SupportSet;
use crate::{norm_inf, C64};

/// Least-squares fit restricted to a support.
#[derive(Clone, Debug, PartialEq)]
pub struct Debiased {
    /// `argmin ‖A_S z − y‖₂`, in support order.
    pub coefficients: Vec<C64>,
    /// Condition number of `A_S*A_S`.
    pub condition: f64,
    /// `‖A_S*(A_S z − y)‖∞`, evaluated with the operator.
    pub normal_residual: f64,
}

/// Solve the normal equations `A_S*A_S z = A_S* y` with the closed-form Gram matrix.
pub fn debias(op: &RadarOperator, y: &[C64], support: &SupportSet) -> Result<Debiased> {
    let cfg = op.config();
    cfg.check_len("measurements", y.len(), cfg.n_measurements())?;
    if support.is_empty() {
        return Err(Error::domain("debiasing needs a nonempty support"));
    }
    let scale2 = cfg.scale() * cfg.scale();
    let gram = gram_closed_form(cfg, op.signals(), support)?.gram * C64::new(scale2, 0.0);
    let ev = hermitian_eigenvalues(&gram)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > SINGULAR_CONDITION {
        return Err(Error::Singular { condition });
    }
    let chol = gram.cholesky().ok_or(Error::Singular { condition })?;
    let restrict = |v: Vec<C64>| -> Vec<C64> { support.linear().iter().map(|&k| v[k]).collect() };
    let rhs = restrict(op.adjoint(y)?);
    let target = 1e-8 * norm_inf(&rhs);
    let mut z: Vec<C64> = chol.solve(&DVector::from_vec(rhs.clone())).iter().copied().collect();
    let normal = |z: &[C64]| -> Result<Vec<C64>> {
        let entries: Vec<_> = support.indices().iter().copied().zip(z.iter().copied()).collect();
        let mut r = op.forward_sparse(&entries)?;
        r.iter_mut().zip(y).for_each(|(a, b)| *a -= b);
        Ok(restrict(op.adjoint(&r)?))
    };
    let mut res = normal(&z)?;
    // A couple of refinement sweeps absorb rounding in the closed-form Gram.
    for _ in 0..3 {
        if norm_inf(&res) <= target {
            break;
        }
        let dz = chol.solve(&DVector::from_vec(res));
        z.iter_mut().zip(dz.iter()).for_each(|(a, d)| *a -= d);
        res = normal(&z)?;
    }
    Ok(Debiased { coefficients: z, condition, normal_residual: norm_inf(&res) })
}
