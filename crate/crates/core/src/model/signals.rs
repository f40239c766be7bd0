use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::RadarConfig;
use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use crate::C64;

/// Distribution of the probing-signal entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalFamily {
    /// `(g₁ + i g₂)/√2` with independent standard normal `g₁, g₂`, so `E|s|² = 1`.
    ComplexGaussian,
    /// Uniform on `{+1, −1}`.
    Rademacher,
    /// Uniform on the complex unit circle.
    Steinhaus,
}

impl SignalFamily {
    pub const ALL: [SignalFamily; 3] = [
        SignalFamily::ComplexGaussian,
        SignalFamily::Rademacher,
        SignalFamily::Steinhaus,
    ];

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> C64 {
        match self {
            SignalFamily::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im) * FRAC_1_SQRT_2
            }
            SignalFamily::Rademacher => {
                if rng.random::<bool>() {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(-1.0, 0.0)
                }
            }
            SignalFamily::Steinhaus => C64::from_polar(1.0, TAU * rng.random::<f64>()),
        }
    }
}

impl std::fmt::Display for SignalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignalFamily::ComplexGaussian => "complex-gaussian",
            SignalFamily::Rademacher => "rademacher",
            SignalFamily::Steinhaus => "steinhaus",
        })
    }
}

impl std::str::FromStr for SignalFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex-gaussian" | "gaussian" => Ok(SignalFamily::ComplexGaussian),
            "rademacher" => Ok(SignalFamily::Rademacher),
            "steinhaus" => Ok(SignalFamily::Steinhaus),
            other => Err(Error::parameter(format!("unknown signal family `{other}`"))),
        }
    }
}

/// The `N_T` probing signals `s_i ∈ C^{N_t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSet {
    pub family: SignalFamily,
    pub seed: u64,
    signals: Vec<Vec<C64>>,
}

impl SignalSet {
    /// Wrap explicitly supplied signals, e.g. read back from a materialised bundle.
    pub fn from_raw(
        cfg: &RadarConfig,
        family: SignalFamily,
        seed: u64,
        signals: Vec<Vec<C64>>,
    ) -> Result<Self> {
        cfg.check_len("signal set", signals.len(), cfg.n_transmit)?;
        for s in &signals {
            cfg.check_len("signal", s.len(), cfg.n_samples)?;
        }
        Ok(SignalSet {
            family,
            seed,
            signals,
        })
    }

    pub fn signals(&self) -> &[Vec<C64>] {
        &self.signals
    }

    pub fn n_transmit(&self) -> usize {
        self.signals.len()
    }

    pub fn n_samples(&self) -> usize {
        self.signals.first().map_or(0, Vec::len)
    }

    /// Entry `s_(i,a)`, both indices 0-based.
    pub fn entry(&self, i: usize, a: usize) -> C64 {
        self.signals[i][a]
    }

    /// `(s_1ᵀ, …, s_{N_T}ᵀ)ᵀ`.
    pub fn stacked(&self) -> Vec<C64> {
        self.signals.concat()
    }
}

/// Draw `N_T` independent signals; signal `i` uses its own stream keyed by `(seed, i)`.
pub fn generate_signals(cfg: &RadarConfig, family: SignalFamily, seed: u64) -> SignalSet {
    let signals = (0..cfg.n_transmit)
        .map(|i| {
            let mut rng = stream(seed, tag::SIGNALS, &[i as u64]);
            (0..cfg.n_samples).map(|_| family.sample(&mut rng)).collect()
        })
        .collect();
    SignalSet {
        family,
        seed,
        signals,
    }
}
