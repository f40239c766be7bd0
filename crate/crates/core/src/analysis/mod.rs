//! Gram matrices, recovery conditions, restricted isometry constants and
//! tail probes of the support-restricted operator.
//!
//! Everything here works with the normalised matrix `Ã = A / √(N_T N_R N_t)`,
//! whose columns have unit expected norm.

mod conditions;
mod gram;
mod rip;
mod tail;

pub use conditions::{check_conditions, Condition, ConditionsReport};
pub use gram::{
    gram_closed_form, gram_direct, hermitian_eigenvalues, spectral_deviation,
    spectral_deviation_power, GramReport, EXACT_EIGEN_LIMIT, SINGULAR_CONDITION,
};
pub use rip::{exact_rip_constant, DEFAULT_RIP_CAP};
pub use tail::{delta_grid, tail_probe_opnorm, TailProbe};
