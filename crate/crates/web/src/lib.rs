//! Browser bindings for the interactive demo in `www/`.
//!
//! Each exported function rebuilds a small instance from its parameters and
//! returns flat `f64` arrays that the page draws on a canvas. The `*_impl`
//! functions hold the logic so it can be tested natively.

use wasm_bindgen::prelude::*;

use mimo_cs::analysis::{gram_closed_form, tail_probe_opnorm};
use mimo_cs::experiments::gaussian_noise;
use mimo_cs::solvers::{declare_success, lasso, default_lambda, SolverOptions};
use mimo_cs::support::{balancedness, make_scene, threshold_amplitude, EtaRule};
use mimo_cs::{generate_signals, DopplerMode, RadarConfig, RadarOperator, Result, SignalFamily};

/// Demo problems stay small enough to solve interactively.
const MAX_GRID: usize = 16_384;

fn config(nt: usize, nr: usize, ntime: usize) -> Result<RadarConfig> {
    let cfg = RadarConfig::new(nt, nr, ntime, DopplerMode::DopplerFree)?;
    if cfg.grid_size() > MAX_GRID {
        return Err(mimo_cs::Error::Size { entries: cfg.grid_size(), cap: MAX_GRID });
    }
    Ok(cfg)
}

/// Magnitudes of the normalised Gram matrix of a random support.
///
/// Layout: `[s, deviation, eta, |G| row-major (s·s values)]`, with the
/// support ordered by angle class so the block structure is visible.
pub fn gram_magnitudes_impl(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, seed: u64) -> Result<Vec<f64>> {
    let cfg = config(nt, nr, ntime)?;
    let rule: EtaRule = eta.parse()?;
    let sig = generate_signals(&cfg, SignalFamily::ComplexGaussian, seed);
    let support = rule.sample(&cfg, s, seed)?;
    let report = gram_closed_form(&cfg, &sig, &support)?;
    let order: Vec<usize> = support.classes().iter().flatten().copied().collect();
    let mut out = vec![s as f64, report.deviation, balancedness(&cfg, &support)?.eta_f64()];
    for &p in &order {
        out.extend(order.iter().map(|&q| report.gram[(p, q)].norm()));
    }
    Ok(out)
}

/// One noisy recovery on the angle–delay grid.
///
/// Layout: `[success, linf_error, iterations, n_angles, n_delays,
/// |x| (N values), |x_hat| (N values)]`.
pub fn recover_impl(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let cfg = config(nt, nr, ntime)?;
    let rule: EtaRule = eta.parse()?;
    if !(sigma > 0.0) {
        return Err(mimo_cs::Error::Parameter("noise level must be positive".into()));
    }
    let op = RadarOperator::new(cfg, generate_signals(&cfg, SignalFamily::ComplexGaussian, seed))?;
    let amplitude = threshold_amplitude(&cfg, sigma);
    let scene = make_scene(rule.sample(&cfg, s, seed)?, amplitude, seed)?;
    let mut y = op.forward_sparse(&scene.entries())?;
    let noise = gaussian_noise(y.len(), sigma, seed);
    y.iter_mut().zip(noise).for_each(|(v, n)| *v += n);
    let result = lasso(&op, &y, default_lambda(&cfg, sigma), &SolverOptions::default())?;
    let truth = scene.to_dense(&cfg);
    let verdict = declare_success(&truth, &result.x_hat, 0.5 * amplitude)?;
    let mut out = vec![
        f64::from(u8::from(verdict.success)),
        verdict.linf_error,
        result.iterations as f64,
        cfg.n_angles() as f64,
        cfg.n_samples as f64,
    ];
    out.extend(truth.iter().map(|v| v.norm()));
    out.extend(result.x_hat.iter().map(|v| v.norm()));
    Ok(out)
}

/// Empirical survival curve of the Gram deviation.
///
/// Layout: `[median, deltas (50), survival (50)]`.
pub fn tail_curve_impl(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let cfg = config(nt, nr, ntime)?;
    let rule: EtaRule = eta.parse()?;
    let probe = tail_probe_opnorm(&cfg, SignalFamily::ComplexGaussian, s, rule, trials.min(2000), seed)?;
    let mut out = vec![probe.median];
    out.extend(&probe.deltas);
    out.extend(&probe.survival);
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn gram_magnitudes(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(gram_magnitudes_impl(nt, nr, ntime, s, eta, u64::from(seed)))
}

#[wasm_bindgen]
pub fn recover(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, sigma: f64, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(recover_impl(nt, nr, ntime, s, eta, sigma, u64::from(seed)))
}

#[wasm_bindgen]
pub fn tail_curve(nt: usize, nr: usize, ntime: usize, s: usize, eta: &str, trials: usize, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(tail_curve_impl(nt, nr, ntime, s, eta, trials, u64::from(seed)))
}
