use rayon::prelude::*;

use super::gram::gram_closed_form;
use crate::error::{Error, Result};
use crate::model::{generate_signals, RadarConfig, SignalFamily};
use crate::rng::{derive_seed, tag};
use crate::support::EtaRule;

/// 50 points log-spaced over `[1e-3, 2]`.
pub fn delta_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), 2f64.ln());
    (0..50).map(|k| (lo + (hi - lo) * k as f64 / 49.0).exp()).collect()
}

/// Empirical distribution of `‖Ã_S*Ã_S − Id‖` over random signals and supports.
#[derive(Clone, Debug, PartialEq)]
pub struct TailProbe {
    pub deltas: Vec<f64>,
    /// Fraction of trials with deviation `≥ δ`, per grid point.
    pub survival: Vec<f64>,
    pub median: f64,
    /// Per-trial deviations in trial order.
    pub deviations: Vec<f64>,
}

impl TailProbe {
    /// CSV with header `delta,survival`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,survival\n");
        for (d, p) in self.deltas.iter().zip(&self.survival) {
            out.push_str(&format!("{d:.6e},{p:.6}\n"));
        }
        out
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("trials".into(), self.deviations.len().to_string()),
            ("median".into(), format!("{:e}", self.median)),
            ("max".into(), format!("{:e}", self.deviations.iter().copied().fold(0.0, f64::max))),
        ]
    }
}

/// Draw `n_trials` independent signal sets and supports and record the
/// spectral deviation of each normalised Gram matrix.
///
/// Trial `t` derives its seeds from `(seed, t)` alone, so the result does
/// not depend on the number of worker threads.
pub fn tail_probe_opnorm(
    cfg: &RadarConfig,
    family: SignalFamily,
    s: usize,
    eta: EtaRule,
    n_trials: usize,
    seed: u64,
) -> Result<TailProbe> {
    if n_trials == 0 {
        return Err(Error::parameter("tail probe needs at least one trial"));
    }
    eta.check(cfg, s)?;
    let deviations = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let sig = generate_signals(cfg, family, derive_seed(seed, tag::TRIAL, &[t as u64, 0]));
            let support = eta.sample(cfg, s, derive_seed(seed, tag::TRIAL, &[t as u64, 1]))?;
            Ok(gram_closed_form(cfg, &sig, &support)?.deviation)
        })
        .collect::<Result<Vec<f64>>>()?;
    let deltas = delta_grid();
    let total = n_trials as f64;
    let survival = deltas
        .iter()
        .map(|&d| deviations.iter().filter(|&&v| v >= d).count() as f64 / total)
        .collect();
    let mut sorted = deviations.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    Ok(TailProbe { deltas, survival, median, deviations })
}
