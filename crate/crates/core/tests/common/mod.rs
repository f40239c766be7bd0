#![allow(dead_code)]

use std::f64::consts::TAU;

use mimo_cs::{DopplerMode, LinearOperator, RadarConfig, SignalSet, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, TAU * x)
}

/// Measurement matrix written straight from the column formula with
/// floating-point phases, independent of the library's index helpers.
pub fn oracle_matrix(cfg: &RadarConfig, sig: &SignalSet) -> DMatrix<C64> {
    let (ntx, nrx, nt) = (cfg.n_transmit, cfg.n_receive, cfg.n_samples);
    let dopplers: Vec<usize> = match cfg.doppler_mode {
        DopplerMode::Full => (1..=nt).collect(),
        DopplerMode::DopplerFree => vec![nt],
    };
    let mut a = DMatrix::zeros(nrx * nt, cfg.grid_size());
    let mut col = 0;
    for beta in 1..=ntx * nrx {
        let u: Vec<C64> = (0..nt)
            .map(|k| {
                (0..ntx)
                    .map(|i| cis((beta * i) as f64 / (ntx * nrx) as f64) * sig.signals()[i][k])
                    .sum()
            })
            .collect();
        for tau in 1..=nt {
            for &f in &dopplers {
                for j in 0..nrx {
                    let w = cis((beta * j) as f64 / nrx as f64);
                    for k in 0..nt {
                        let src = (k + nt * 2 - tau % nt) % nt;
                        a[(j * nt + k, col)] = w * cis((f * k) as f64 / nt as f64) * u[src];
                    }
                }
                col += 1;
            }
        }
    }
    a
}

pub fn apply(op: &impl LinearOperator, x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); op.nrows()];
    op.apply(x, &mut out);
    out
}

pub fn apply_adjoint(op: &impl LinearOperator, y: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); op.ncols()];
    op.apply_adjoint(y, &mut out);
    out
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
