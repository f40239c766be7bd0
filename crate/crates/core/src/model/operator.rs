use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use super::{
    circular_shift, modulate, receive_phase, transmit_phase, turns, DopplerMode, GridIndex,
    RadarConfig, SignalSet,
};
use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the number of entries of a densified matrix.
pub const DEFAULT_DENSE_CAP: usize = 65_536;

/// A linear map `C^ncols → C^nrows` with its adjoint.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x`; `out` is overwritten.
    fn apply(&self, x: &[C64], out: &mut [C64]);
    /// `out = A* y`; `out` is overwritten.
    fn apply_adjoint(&self, y: &[C64], out: &mut [C64]);
}

/// Explicit matrix wrapper, mostly for oracles and small instances.
#[derive(Clone, Debug)]
pub struct DenseOperator(pub DMatrix<C64>);

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }

    fn ncols(&self) -> usize {
        self.0.ncols()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        out.fill(C64::default());
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::default() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.0.column(j).iter()) {
                *o += a * xj;
            }
        }
    }

    fn apply_adjoint(&self, y: &[C64], out: &mut [C64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self
                .0
                .column(j)
                .iter()
                .zip(y)
                .map(|(a, &v)| a.conj() * v)
                .sum();
        }
    }
}

/// The MIMO radar measurement matrix `A`, applied without materialising it.
///
/// Column `Θ = (β, τ, f)` is `w(β) ⊗ M_f T_τ u_β`, where
/// `w(β)_j = exp(2πi d_R β Δβ (j−1))` depends on `β` only through its angle
/// class and `u_β = Σ_i exp(2πi d_T β Δβ (i−1)) s_i` mixes the transmit
/// signals. Forward and adjoint products run per angle bin with length-`N_t`
/// FFTs (circular convolution over `τ`, DFT over `f`).
pub struct RadarOperator {
    cfg: RadarConfig,
    signals: SignalSet,
    /// `u_β` for `β = 1..=N_T N_R`.
    mixed: Vec<Vec<C64>>,
    /// DFT of `u_β`.
    spectra: Vec<Vec<C64>>,
    /// `w_j(c)` for class `c` and 0-based receiver `j`, indexed `[c][j]`.
    receive: Vec<Vec<C64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RadarOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadarOperator")
            .field("cfg", &self.cfg)
            .field("family", &self.signals.family)
            .field("seed", &self.signals.seed)
            .finish()
    }
}

impl RadarOperator {
    pub fn new(cfg: RadarConfig, signals: SignalSet) -> Result<Self> {
        cfg.check_len("signal set", signals.n_transmit(), cfg.n_transmit)?;
        cfg.check_len("signal", signals.n_samples(), cfg.n_samples)?;
        let nt = cfg.n_samples;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(nt);
        let ifft = planner.plan_fft_inverse(nt);

        let mixed: Vec<Vec<C64>> = (1..=cfg.n_angles() as i64)
            .map(|beta| {
                let mut u = vec![C64::default(); nt];
                for (i, s) in signals.signals().iter().enumerate() {
                    let w = transmit_phase(&cfg, beta, i as i64 + 1);
                    for (acc, &v) in u.iter_mut().zip(s) {
                        *acc += w * v;
                    }
                }
                u
            })
            .collect();
        let spectra = mixed
            .iter()
            .map(|u| {
                let mut buf = u.clone();
                fft.process(&mut buf);
                buf
            })
            .collect();
        let receive = (0..cfg.n_receive)
            .map(|c| {
                // any β with class label c, e.g. β = c + 1
                (0..cfg.n_receive)
                    .map(|j| receive_phase(&cfg, c as i64 + 1, j as i64 + 1))
                    .collect()
            })
            .collect();
        Ok(RadarOperator {
            cfg,
            signals,
            mixed,
            spectra,
            receive,
            fft,
            ifft,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.cfg
    }

    pub fn signals(&self) -> &SignalSet {
        &self.signals
    }

    /// Column `A_Θ` for a grid point.
    pub fn column(&self, theta: &GridIndex) -> Result<Vec<C64>> {
        if !self.cfg.contains(theta) {
            return Err(Error::domain(format!("grid index {theta} is outside the grid")));
        }
        Ok(self.column_at(theta.beta as i64, theta.tau as i64, theta.f as i64))
    }

    /// Column formula evaluated for arbitrary integer parameters, straight from
    /// the definition (no FFTs, no cached mixtures).
    pub fn column_at(&self, beta: i64, tau: i64, f: i64) -> Vec<C64> {
        let cfg = &self.cfg;
        let mut block = vec![C64::default(); cfg.n_samples];
        for (i, s) in self.signals.signals().iter().enumerate() {
            let w = transmit_phase(cfg, beta, i as i64 + 1);
            let shifted = modulate(&circular_shift(s, tau), f);
            for (acc, v) in block.iter_mut().zip(shifted) {
                *acc += w * v;
            }
        }
        let mut col = Vec::with_capacity(cfg.n_measurements());
        for j in 1..=cfg.n_receive as i64 {
            let w = receive_phase(cfg, beta, j);
            col.extend(block.iter().map(|&v| w * v));
        }
        col
    }

    /// Scaled column `Ã_Θ = A_Θ / √(N_T N_R N_t)`.
    pub fn scaled_column(&self, theta: &GridIndex) -> Result<Vec<C64>> {
        let s = 1.0 / self.cfg.scale();
        Ok(self.column(theta)?.into_iter().map(|v| v * s).collect())
    }

    /// `A x` for a dense coefficient vector over the grid.
    pub fn forward(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.cfg.check_len("coefficient vector", x.len(), self.cfg.grid_size())?;
        let mut out = vec![C64::default(); self.cfg.n_measurements()];
        self.apply(x, &mut out);
        Ok(out)
    }

    /// `Σ_Θ x_Θ A_Θ` over an explicit list of grid points.
    pub fn forward_sparse(&self, entries: &[(GridIndex, C64)]) -> Result<Vec<C64>> {
        let mut out = vec![C64::default(); self.cfg.n_measurements()];
        for (theta, v) in entries {
            for (o, a) in out.iter_mut().zip(self.column(theta)?) {
                *o += a * v;
            }
        }
        Ok(out)
    }

    /// `A* y`; entry `Θ` equals `⟨A_Θ, y⟩`.
    pub fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.cfg.check_len("measurement vector", y.len(), self.cfg.n_measurements())?;
        let mut out = vec![C64::default(); self.cfg.grid_size()];
        self.apply_adjoint(y, &mut out);
        Ok(out)
    }

    /// Dense `N_R N_t × N` matrix with columns in grid storage order.
    pub fn densify(&self, cap: usize) -> Result<DMatrix<C64>> {
        let (m, n) = (self.cfg.n_measurements(), self.cfg.grid_size());
        let entries = m.saturating_mul(n);
        if entries > cap {
            return Err(Error::Size { entries, cap });
        }
        let mut a = DMatrix::zeros(m, n);
        for k in 0..n {
            let theta = self.cfg.grid_index(k)?;
            let col = self.column(&theta)?;
            a.column_mut(k).copy_from_slice(&col);
        }
        Ok(a)
    }

    fn block_len(&self) -> usize {
        self.cfg.n_samples * self.cfg.n_doppler()
    }
}

impl LinearOperator for RadarOperator {
    fn nrows(&self) -> usize {
        self.cfg.n_measurements()
    }

    fn ncols(&self) -> usize {
        self.cfg.grid_size()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let cfg = &self.cfg;
        let nt = cfg.n_samples;
        let nr = cfg.n_receive;
        let blen = self.block_len();
        let zero = C64::default();
        // Per-class time-domain signal v_c = Σ_{β ∈ c} Σ_{τ,f} x_Θ M_f T_τ u_β.
        let mut per_class = vec![vec![zero; nt]; nr];
        let mut buf = vec![zero; nt];
        let mut scratch = vec![zero; self.fft.get_inplace_scratch_len().max(self.ifft.get_inplace_scratch_len())];
        match cfg.doppler_mode {
            DopplerMode::DopplerFree => {
                let mut freq = vec![vec![zero; nt]; nr];
                for (b, xb) in x.chunks_exact(blen).enumerate() {
                    if xb.iter().all(|&v| v == zero) {
                        continue;
                    }
                    // x'[τ mod N_t] = x_{β,τ}
                    for (tau0, &v) in xb.iter().enumerate() {
                        buf[(tau0 + 1) % nt] = v;
                    }
                    self.fft.process_with_scratch(&mut buf, &mut scratch);
                    let acc = &mut freq[cfg.class_of(b + 1)];
                    for ((a, &p), &u) in acc.iter_mut().zip(&buf).zip(&self.spectra[b]) {
                        *a += p * u;
                    }
                }
                let norm = 1.0 / nt as f64;
                for (v, mut spec) in per_class.iter_mut().zip(freq) {
                    self.ifft.process_with_scratch(&mut spec, &mut scratch);
                    for (o, s) in v.iter_mut().zip(spec) {
                        *o = s * norm;
                    }
                }
            }
            DopplerMode::Full => {
                for (b, xb) in x.chunks_exact(blen).enumerate() {
                    let u = &self.mixed[b];
                    let acc = &mut per_class[cfg.class_of(b + 1)];
                    for (tau0, row) in xb.chunks_exact(nt).enumerate() {
                        if row.iter().all(|&v| v == zero) {
                            continue;
                        }
                        // g[k] = Σ_f x_{β,τ,f} exp(2πi f k / N_t), indexed by f mod N_t
                        for (f0, &v) in row.iter().enumerate() {
                            buf[(f0 + 1) % nt] = v;
                        }
                        self.ifft.process_with_scratch(&mut buf, &mut scratch);
                        let tau = tau0 + 1;
                        for (k, (a, &g)) in acc.iter_mut().zip(&buf).enumerate() {
                            *a += g * u[(k + nt - tau % nt) % nt];
                        }
                    }
                }
            }
        }
        for (j, yj) in out.chunks_exact_mut(nt).enumerate() {
            yj.fill(zero);
            for (c, v) in per_class.iter().enumerate() {
                let w = self.receive[c][j];
                for (o, &s) in yj.iter_mut().zip(v) {
                    *o += w * s;
                }
            }
        }
    }

    fn apply_adjoint(&self, y: &[C64], out: &mut [C64]) {
        let cfg = &self.cfg;
        let nt = cfg.n_samples;
        let nr = cfg.n_receive;
        let blen = self.block_len();
        let zero = C64::default();
        let mut scratch = vec![zero; self.fft.get_inplace_scratch_len().max(self.ifft.get_inplace_scratch_len())];
        // z_c = Σ_j conj(w_j(c)) y_j
        let mut z = vec![vec![zero; nt]; nr];
        for (c, zc) in z.iter_mut().enumerate() {
            for (j, yj) in y.chunks_exact(nt).enumerate() {
                let w = self.receive[c][j].conj();
                for (o, &v) in zc.iter_mut().zip(yj) {
                    *o += w * v;
                }
            }
        }
        let mut buf = vec![zero; nt];
        match cfg.doppler_mode {
            DopplerMode::DopplerFree => {
                for zc in z.iter_mut() {
                    self.fft.process_with_scratch(zc, &mut scratch);
                }
                let norm = 1.0 / nt as f64;
                for (b, ob) in out.chunks_exact_mut(blen).enumerate() {
                    let zf = &z[cfg.class_of(b + 1)];
                    for ((o, &u), &zv) in buf.iter_mut().zip(&self.spectra[b]).zip(zf) {
                        *o = u.conj() * zv;
                    }
                    self.ifft.process_with_scratch(&mut buf, &mut scratch);
                    for (tau0, o) in ob.iter_mut().enumerate() {
                        *o = buf[(tau0 + 1) % nt] * norm;
                    }
                }
            }
            DopplerMode::Full => {
                for (b, ob) in out.chunks_exact_mut(blen).enumerate() {
                    let u = &self.mixed[b];
                    let zc = &z[cfg.class_of(b + 1)];
                    for (tau0, row) in ob.chunks_exact_mut(nt).enumerate() {
                        let tau = tau0 + 1;
                        for (k, h) in buf.iter_mut().enumerate() {
                            *h = u[(k + nt - tau % nt) % nt].conj() * zc[k];
                        }
                        self.fft.process_with_scratch(&mut buf, &mut scratch);
                        for (f0, o) in row.iter_mut().enumerate() {
                            *o = buf[(f0 + 1) % nt];
                        }
                    }
                }
            }
        }
    }
}

/// The `N_R N_t × N_T N_t` matrix `X_Θ` with `X_Θ s = A_Θ` for the stacked signal vector `s`.
///
/// Block `(i, j)` is `exp(2πi d_R β Δβ (i−1)) exp(2πi d_T β Δβ (j−1)) M_f T_τ`.
pub fn build_x_theta(cfg: &RadarConfig, theta: &GridIndex, cap: usize) -> Result<DMatrix<C64>> {
    if !cfg.contains(theta) {
        return Err(Error::domain(format!("grid index {theta} is outside the grid")));
    }
    let nt = cfg.n_samples;
    let (rows, cols) = (cfg.n_receive * nt, cfg.n_transmit * nt);
    let entries = rows.saturating_mul(cols);
    if entries > cap {
        return Err(Error::Size { entries, cap });
    }
    let (beta, tau, f) = (theta.beta as i64, theta.tau as i64, theta.f as i64);
    let mut x = DMatrix::zeros(rows, cols);
    for i in 0..cfg.n_receive {
        let wr = receive_phase(cfg, beta, i as i64 + 1);
        for j in 0..cfg.n_transmit {
            let w = wr * transmit_phase(cfg, beta, j as i64 + 1);
            for k in 0..nt as i64 {
                let src = (k - tau).rem_euclid(nt as i64) as usize;
                let m = turns(num_rational::Rational64::new(f * k, nt as i64));
                x[(i * nt + k as usize, j * nt + src)] = w * m;
            }
        }
    }
    Ok(x)
}
