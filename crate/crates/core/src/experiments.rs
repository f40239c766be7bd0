//! Seeded Monte Carlo harness: success rate of LASSO support recovery
//! against sparsity, one curve per balancedness rule.

use std::path::Path;
use std::time::Instant;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{generate_signals, DopplerMode, RadarConfig, RadarOperator, SignalFamily};
use crate::rng::{derive_seed, stream, tag};
use crate::solvers::{basis_pursuit_denoise, declare_success, lasso, default_lambda, SolverOptions};
use crate::support::{make_scene, threshold_amplitude, EtaRule};
use crate::C64;

/// Success threshold on `‖x − x_hat‖∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    /// Half the target amplitude.
    HalfAmplitude,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub cfg: RadarConfig,
    pub family: SignalFamily,
    /// Noise standard deviation, `E|n_k|² = σ²`.
    pub sigma: f64,
    pub sparsity_grid: Vec<usize>,
    pub eta_list: Vec<EtaRule>,
    pub trials: usize,
    pub master_seed: u64,
    pub threshold: ThresholdRule,
    /// Target magnitude; `None` places targets exactly at the recovery threshold for `σ`.
    pub amplitude: Option<f64>,
    /// LASSO weight; `None` uses [`default_lambda`]. A zero weight switches to
    /// basis pursuit with `ρ = 0`.
    pub lambda: Option<f64>,
    pub solver: SolverOptions,
}

impl ExperimentSpec {
    /// The large-array setup: `N_T = N_R = 8`, `N_t = 64`, Doppler-free, σ = 1.
    pub fn default_scan() -> Self {
        ExperimentSpec {
            cfg: RadarConfig::new(8, 8, 64, DopplerMode::DopplerFree).expect("valid dimensions"),
            family: SignalFamily::ComplexGaussian,
            sigma: 1.0,
            sparsity_grid: (1..=17).map(|k| 8 * k).collect(),
            eta_list: vec![
                EtaRule::Balanced(1),
                EtaRule::Balanced(2),
                EtaRule::Balanced(4),
                EtaRule::Balanced(8),
                EtaRule::Free,
            ],
            trials: 200,
            master_seed: 0,
            threshold: ThresholdRule::HalfAmplitude,
            amplitude: None,
            lambda: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or_else(|| threshold_amplitude(&self.cfg, self.sigma))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(&self.cfg, self.sigma))
    }

    pub fn threshold(&self) -> f64 {
        match self.threshold {
            ThresholdRule::HalfAmplitude => 0.5 * self.amplitude(),
            ThresholdRule::Fixed(t) => t,
        }
    }

    /// Checks every invariant, including sampler feasibility of each `(s, η)`.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::parameter("trials must be at least 1"));
        }
        if self.sparsity_grid.is_empty() || self.eta_list.is_empty() {
            return Err(Error::parameter("sparsity grid and eta list must be nonempty"));
        }
        if self.sparsity_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parameter("sparsity grid must be strictly increasing"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::parameter(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if self.amplitude.is_none() && self.sigma == 0.0 {
            return Err(Error::parameter("noiseless runs need an explicit amplitude"));
        }
        if !(self.amplitude() > 0.0) {
            return Err(Error::parameter("amplitude must be positive"));
        }
        if !(self.threshold() > 0.0) {
            return Err(Error::parameter("success threshold must be positive"));
        }
        if !(self.lambda() >= 0.0) {
            return Err(Error::parameter("lambda must be non-negative"));
        }
        self.solver.validate()?;
        let mut seen = Vec::new();
        for &eta in &self.eta_list {
            if seen.contains(&eta) {
                return Err(Error::parameter(format!("eta {eta} listed twice")));
            }
            seen.push(eta);
            for &s in &self.sparsity_grid {
                eta.check(&self.cfg, s)?;
            }
        }
        Ok(())
    }
}

/// Outcome of one simulated scene.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub s: usize,
    pub eta: EtaRule,
    pub index: usize,
    pub success: bool,
    pub support_exact: bool,
    pub linf_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
}

fn trial_seed(master: u64, s: usize, eta: EtaRule, index: usize) -> u64 {
    let eta_code = match eta {
        EtaRule::Balanced(e) => e as u64,
        EtaRule::Free => 0,
    };
    derive_seed(master, tag::TRIAL, &[s as u64, eta_code, index as u64])
}

/// Complex Gaussian noise with `E|n_k|² = σ²`.
pub fn gaussian_noise(len: usize, sigma: f64, seed: u64) -> Vec<C64> {
    if sigma == 0.0 {
        return vec![C64::default(); len];
    }
    let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2).expect("finite sigma");
    let mut rng = stream(seed, tag::NOISE, &[len as u64]);
    (0..len)
        .map(|_| C64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect()
}

/// Run one trial; all randomness comes from `(master_seed, s, η, index)`.
///
/// A solver that does not converge counts as a failure.
pub fn run_trial(spec: &ExperimentSpec, s: usize, eta: EtaRule, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let cfg = &spec.cfg;
    let seed = trial_seed(spec.master_seed, s, eta, index);
    let signals = generate_signals(cfg, spec.family, seed);
    let op = RadarOperator::new(*cfg, signals)?;
    let support = eta.sample(cfg, s, seed)?;
    let scene = make_scene(support, spec.amplitude(), seed)?;
    let mut y = op.forward_sparse(&scene.entries())?;
    let noise = gaussian_noise(y.len(), spec.sigma, seed);
    for (v, n) in y.iter_mut().zip(noise) {
        *v += n;
    }
    let lambda = spec.lambda();
    let result = if lambda > 0.0 {
        lasso(&op, &y, lambda, &spec.solver)?
    } else {
        basis_pursuit_denoise(&op, &y, 0.0, &spec.solver)?
    };
    let verdict = declare_success(&scene.to_dense(cfg), &result.x_hat, spec.threshold())?;
    if !result.converged {
        log::warn!("trial s={s} eta={eta} index={index}: solver did not converge");
    }
    Ok(TrialRecord {
        s,
        eta,
        index,
        success: verdict.success && result.converged,
        support_exact: verdict.support_exact && result.converged,
        linf_error: verdict.linf_error,
        iterations: result.iterations,
        converged: result.converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Aggregate over the trials of one `(s, η)` grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub s: usize,
    pub eta: EtaRule,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub non_converged: usize,
    /// Summed trial time in seconds.
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by `(η, s)` with unconstrained supports last.
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    pub fn row(&self, eta: EtaRule, s: usize) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.eta == eta && r.s == s)
    }

    pub fn curve(&self, eta: EtaRule) -> Vec<&ExperimentRow> {
        self.rows.iter().filter(|r| r.eta == eta).collect()
    }
}

/// Run every `(η, s, trial)` of the spec in parallel on the current rayon pool.
///
/// Each trial owns its random streams and counts are integer sums, so the
/// result does not depend on scheduling or thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut points: Vec<(EtaRule, usize)> = spec
        .eta_list
        .iter()
        .flat_map(|&eta| spec.sparsity_grid.iter().map(move |&s| (eta, s)))
        .collect();
    points.sort();
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let records = tasks
        .par_iter()
        .map(|&(p, t)| run_trial(spec, points[p].1, points[p].0, t))
        .collect::<Result<Vec<_>>>()?;
    let rows = points
        .iter()
        .zip(records.chunks(spec.trials))
        .map(|(&(eta, s), recs)| {
            let successes = recs.iter().filter(|r| r.success).count();
            ExperimentRow {
                s,
                eta,
                trials: recs.len(),
                successes,
                success_rate: successes as f64 / recs.len() as f64,
                mean_iterations: recs.iter().map(|r| r.iterations as f64).sum::<f64>() / recs.len() as f64,
                non_converged: recs.iter().filter(|r| !r.converged).count(),
                wall_time: recs.iter().map(|r| r.seconds).sum(),
            }
        })
        .collect();
    Ok(ExperimentResult { rows })
}

pub const CSV_HEADER: &str = "s,eta,trials,successes,success_rate";

/// A parsed CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub s: usize,
    pub eta: EtaRule,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

pub fn to_csv(result: &ExperimentResult) -> String {
    let mut rows: Vec<&ExperimentRow> = result.rows.iter().collect();
    rows.sort_by_key(|r| (r.eta, r.s));
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{:.6}\n", r.s, r.eta, r.trials, r.successes, r.success_rate));
    }
    out
}

pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(result)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::parse(path, format!("expected header `{CSV_HEADER}`, found {other:?}")));
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = |what: &str| Error::parse(path, format!("line {}: {what}", n + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            Ok(CsvRow {
                s: f[0].trim().parse().map_err(|_| bad("bad s"))?,
                eta: f[1].parse().map_err(|_| bad("bad eta"))?,
                trials: f[2].trim().parse().map_err(|_| bad("bad trials"))?,
                successes: f[3].trim().parse().map_err(|_| bad("bad successes"))?,
                success_rate: f[4].trim().parse().map_err(|_| bad("bad success_rate"))?,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Experiment settings as read from a TOML file; absent keys keep defaults.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub n_transmit: Option<usize>,
    pub n_receive: Option<usize>,
    pub n_samples: Option<usize>,
    pub doppler_mode: Option<DopplerMode>,
    pub family: Option<String>,
    pub sigma: Option<f64>,
    pub sparsity: Option<Vec<usize>>,
    /// Integers or the string `free`.
    pub eta: Option<Vec<toml::Value>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// `"half-amplitude"` or a positive number.
    pub threshold: Option<toml::Value>,
    pub amplitude: Option<f64>,
    pub lambda: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl ExperimentFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Overlay the file onto `base`.
    pub fn apply(&self, base: ExperimentSpec) -> Result<ExperimentSpec> {
        let mut spec = base;
        let c = spec.cfg;
        spec.cfg = RadarConfig::new(
            self.n_transmit.unwrap_or(c.n_transmit),
            self.n_receive.unwrap_or(c.n_receive),
            self.n_samples.unwrap_or(c.n_samples),
            self.doppler_mode.unwrap_or(c.doppler_mode),
        )?;
        if let Some(f) = &self.family {
            spec.family = f.parse()?;
        }
        if let Some(v) = self.sigma {
            spec.sigma = v;
        }
        if let Some(v) = &self.sparsity {
            spec.sparsity_grid = v.clone();
        }
        if let Some(list) = &self.eta {
            spec.eta_list = list
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) if *i > 0 => Ok(EtaRule::Balanced(*i as usize)),
                    toml::Value::String(s) => s.parse(),
                    other => Err(Error::parameter(format!("bad eta entry {other}"))),
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.seed {
            spec.master_seed = v;
        }
        if let Some(t) = &self.threshold {
            spec.threshold = match t {
                toml::Value::String(s) if s == "half-amplitude" => ThresholdRule::HalfAmplitude,
                toml::Value::Float(x) => ThresholdRule::Fixed(*x),
                toml::Value::Integer(i) => ThresholdRule::Fixed(*i as f64),
                other => return Err(Error::parameter(format!("bad threshold {other}"))),
            };
        }
        if self.amplitude.is_some() {
            spec.amplitude = self.amplitude;
        }
        if self.lambda.is_some() {
            spec.lambda = self.lambda;
        }
        if let Some(v) = self.max_iterations {
            spec.solver.max_iterations = v;
        }
        Ok(spec)
    }
}
