use itertools::Itertools;
use nalgebra::DMatrix;

use super::gram::spectral_deviation;
use crate::error::{Error, Result};
use crate::model::RadarOperator;

/// Default cap on the number of supports enumerated by [`exact_rip_constant`].
pub const DEFAULT_RIP_CAP: u128 = 2_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Restricted isometry constant `δ_s` of `Ã` by enumerating every support of size `s`.
///
/// On a fixed support the worst `|‖Ãx‖² − ‖x‖²|` over unit `x` is the
/// largest eigenvalue deviation of `Ã_S*Ã_S`, so the maximum over supports is exact.
pub fn exact_rip_constant(op: &RadarOperator, s: usize, cap: u128) -> Result<f64> {
    let cfg = op.config();
    let n = cfg.grid_size();
    if s == 0 || s > n {
        return Err(Error::parameter(format!("sparsity {s} is outside 1..={n}")));
    }
    let count = binomial(n as u128, s as u128);
    if count > cap {
        return Err(Error::Size {
            entries: usize::try_from(count).unwrap_or(usize::MAX),
            cap: usize::try_from(cap).unwrap_or(usize::MAX),
        });
    }
    let cols = (0..n)
        .map(|k| op.scaled_column(&cfg.grid_index(k)?))
        .collect::<Result<Vec<_>>>()?;
    let full = DMatrix::from_fn(n, n, |p, q| {
        if p <= q {
            crate::inner(&cols[p], &cols[q])
        } else {
            crate::inner(&cols[q], &cols[p]).conj()
        }
    });
    if s == 1 {
        return Ok((0..n).map(|k| (full[(k, k)].re - 1.0).abs()).fold(0.0, f64::max));
    }
    let mut worst = 0.0f64;
    for subset in (0..n).combinations(s) {
        let block = DMatrix::from_fn(s, s, |r, c| full[(subset[r], subset[c])]);
        worst = worst.max(spectral_deviation(&block)?);
    }
    Ok(worst)
}
