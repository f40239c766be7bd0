//! Grid, probing signals and the radar measurement operator.

mod operator;
mod ops;
mod signals;

pub use operator::{
    build_x_theta, DenseOperator, LinearOperator, RadarOperator, DEFAULT_DENSE_CAP,
};
pub use ops::{circular_shift, modulate, turns};
pub use signals::{generate_signals, SignalFamily, SignalSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Whether the Doppler axis of the grid is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DopplerMode {
    /// `f` ranges over `1..=N_t`.
    Full,
    /// Only the zero-Doppler columns (`f ≡ 0 mod N_t`) are kept.
    DopplerFree,
}

impl std::fmt::Display for DopplerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DopplerMode::Full => "full",
            DopplerMode::DopplerFree => "doppler-free",
        })
    }
}

impl std::str::FromStr for DopplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(DopplerMode::Full),
            "doppler-free" | "free" => Ok(DopplerMode::DopplerFree),
            other => Err(Error::parameter(format!("unknown doppler mode `{other}`"))),
        }
    }
}

/// Array and sampling dimensions of the radar.
///
/// Antenna spacings are fixed to `d_T = 1/2` and `d_R = N_T/2` (in
/// wavelengths) and the angle step to `Δβ = 2/(N_T N_R)`, so every phase
/// that enters a column is a rational number of turns. The grid is
/// `[N_T N_R] × [N_t] × [N_t]` (1-based), with the Doppler axis collapsed
/// to `f = N_t` (zero Doppler) in [`DopplerMode::DopplerFree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RadarConfig {
    pub n_transmit: usize,
    pub n_receive: usize,
    pub n_samples: usize,
    pub doppler_mode: DopplerMode,
}

/// A point `(β, τ, f)` of the angle–delay–Doppler grid, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub beta: usize,
    pub tau: usize,
    pub f: usize,
}

impl GridIndex {
    pub fn new(beta: usize, tau: usize, f: usize) -> Self {
        GridIndex { beta, tau, f }
    }
}

impl std::fmt::Display for GridIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.beta, self.tau, self.f)
    }
}

impl RadarConfig {
    pub fn new(
        n_transmit: usize,
        n_receive: usize,
        n_samples: usize,
        doppler_mode: DopplerMode,
    ) -> Result<Self> {
        if n_transmit == 0 || n_receive == 0 || n_samples == 0 {
            return Err(Error::parameter(format!(
                "dimensions must be positive, got N_T={n_transmit}, N_R={n_receive}, N_t={n_samples}"
            )));
        }
        // Keep every phase numerator comfortably inside i64.
        if n_transmit.saturating_mul(n_receive).saturating_mul(n_samples) > 1 << 24 {
            return Err(Error::parameter("dimensions too large"));
        }
        Ok(RadarConfig {
            n_transmit,
            n_receive,
            n_samples,
            doppler_mode,
        })
    }

    /// Transmit spacing `d_T` in wavelengths.
    pub fn d_transmit(&self) -> Rational64 {
        Rational64::new(1, 2)
    }

    /// Receive spacing `d_R` in wavelengths.
    pub fn d_receive(&self) -> Rational64 {
        Rational64::new(self.n_transmit as i64, 2)
    }

    /// Angle grid step `Δβ`.
    pub fn delta_beta(&self) -> Rational64 {
        Rational64::new(2, (self.n_transmit * self.n_receive) as i64)
    }

    /// Number of angle bins `N_T N_R`.
    pub fn n_angles(&self) -> usize {
        self.n_transmit * self.n_receive
    }

    /// Number of Doppler bins kept in the grid.
    pub fn n_doppler(&self) -> usize {
        match self.doppler_mode {
            DopplerMode::Full => self.n_samples,
            DopplerMode::DopplerFree => 1,
        }
    }

    /// Grid size `N`.
    pub fn grid_size(&self) -> usize {
        self.n_angles() * self.n_samples * self.n_doppler()
    }

    /// Number of measurements `m = N_R N_t`.
    pub fn n_measurements(&self) -> usize {
        self.n_receive * self.n_samples
    }

    /// `√(N_T N_R N_t)`, the column normalisation of `Ã = A / √(N_T N_R N_t)`.
    pub fn scale(&self) -> f64 {
        ((self.n_transmit * self.n_receive * self.n_samples) as f64).sqrt()
    }

    /// The Doppler value used for every grid point in Doppler-free mode.
    pub fn zero_doppler(&self) -> usize {
        self.n_samples
    }

    /// Angle class label in `0..N_R`; `β ~ β'` iff the labels agree.
    pub fn class_of(&self, beta: usize) -> usize {
        (beta + self.n_receive - 1) % self.n_receive
    }

    /// Number of grid points in each angle class.
    pub fn class_capacity(&self) -> usize {
        self.grid_size() / self.n_receive
    }

    pub fn contains(&self, theta: &GridIndex) -> bool {
        let f_ok = match self.doppler_mode {
            DopplerMode::Full => (1..=self.n_samples).contains(&theta.f),
            DopplerMode::DopplerFree => theta.f == self.zero_doppler(),
        };
        (1..=self.n_angles()).contains(&theta.beta)
            && (1..=self.n_samples).contains(&theta.tau)
            && f_ok
    }

    /// Position of `theta` in the storage order `((β−1) N_t + (τ−1)) N_f + (f−1)`.
    pub fn linear_index(&self, theta: &GridIndex) -> Result<usize> {
        if !self.contains(theta) {
            return Err(Error::domain(format!("grid index {theta} is outside the grid")));
        }
        let base = (theta.beta - 1) * self.n_samples + (theta.tau - 1);
        Ok(match self.doppler_mode {
            DopplerMode::Full => base * self.n_samples + (theta.f - 1),
            DopplerMode::DopplerFree => base,
        })
    }

    /// Inverse of [`RadarConfig::linear_index`].
    pub fn grid_index(&self, k: usize) -> Result<GridIndex> {
        if k >= self.grid_size() {
            return Err(Error::domain(format!(
                "linear index {k} out of range for grid of size {}",
                self.grid_size()
            )));
        }
        let nd = self.n_doppler();
        let f = match self.doppler_mode {
            DopplerMode::Full => k % nd + 1,
            DopplerMode::DopplerFree => self.zero_doppler(),
        };
        let rest = k / nd;
        Ok(GridIndex {
            beta: rest / self.n_samples + 1,
            tau: rest % self.n_samples + 1,
            f,
        })
    }

    /// The `k`-th grid point of angle class `class`, in storage order.
    pub fn class_member(&self, class: usize, k: usize) -> Result<GridIndex> {
        if class >= self.n_receive || k >= self.class_capacity() {
            return Err(Error::domain(format!(
                "class member ({class}, {k}) out of range"
            )));
        }
        let per_beta = self.n_samples * self.n_doppler();
        let beta = class + 1 + (k / per_beta) * self.n_receive;
        let within = k % per_beta;
        let tau = within / self.n_doppler() + 1;
        let f = match self.doppler_mode {
            DopplerMode::Full => within % self.n_samples + 1,
            DopplerMode::DopplerFree => self.zero_doppler(),
        };
        Ok(GridIndex { beta, tau, f })
    }

    pub(crate) fn check_len(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::domain(format!(
                "{what} has length {got}, expected {want}"
            )));
        }
        Ok(())
    }
}

/// Receive-array phase `exp(2πi d_R β Δβ (j−1))` for a 1-based receiver `j`.
pub fn receive_phase(cfg: &RadarConfig, beta: i64, j: i64) -> C64 {
    turns(cfg.d_receive() * cfg.delta_beta() * beta * (j - 1))
}

/// Transmit-array phase `exp(2πi d_T β Δβ (i−1))` for a 1-based transmitter `i`.
pub fn transmit_phase(cfg: &RadarConfig, beta: i64, i: i64) -> C64 {
    turns(cfg.d_transmit() * cfg.delta_beta() * beta * (i - 1))
}
