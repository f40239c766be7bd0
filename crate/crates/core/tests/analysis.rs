mod common;

use common::*;
use mimo_cs::analysis::*;
use mimo_cs::model::{build_x_theta, DEFAULT_DENSE_CAP};
use mimo_cs::support::{make_scene, sample_balanced_support, sample_unconstrained_support, EtaRule, SupportSet};
use mimo_cs::{generate_signals, DopplerMode, RadarConfig, RadarOperator, SignalFamily, C64};
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn closed_form_gram_matches_inner_products() {
    let mut r = rng(11);
    for trial in 0..60u64 {
        let nt = [1, 2, 4][r.random_range(0..3)];
        let nr = [1, 2, 4][r.random_range(0..3)];
        let ntime = [4, 8, 16][r.random_range(0..3)];
        let mode = if r.random::<bool>() { DopplerMode::Full } else { DopplerMode::DopplerFree };
        let cfg = RadarConfig::new(nt, nr, ntime, mode).unwrap();
        let family = SignalFamily::ALL[trial as usize % 3];
        let sig = generate_signals(&cfg, family, trial);
        let s = r.random_range(1..=8.min(cfg.grid_size()));
        let support = sample_unconstrained_support(&cfg, s, trial).unwrap();
        let op = RadarOperator::new(cfg, sig.clone()).unwrap();
        let closed = gram_closed_form(&cfg, &sig, &support).unwrap();
        let direct = gram_direct(&op, &support).unwrap();
        let gap = max_abs_diff(closed.gram.as_slice(), direct.gram.as_slice());
        assert!(gap <= 1e-10, "{cfg:?}: {gap}");
        assert!((closed.deviation - direct.deviation).abs() <= 1e-9);
    }
}

#[test]
fn deviation_is_max_block_deviation() {
    let cfg = RadarConfig::new(2, 4, 8, DopplerMode::DopplerFree).unwrap();
    for seed in 0..10 {
        let sig = generate_signals(&cfg, SignalFamily::ComplexGaussian, seed);
        let support = sample_unconstrained_support(&cfg, 7, seed).unwrap();
        let rep = gram_closed_form(&cfg, &sig, &support).unwrap();
        let whole = spectral_deviation(&rep.gram).unwrap();
        assert!((whole - rep.deviation).abs() < 1e-12);
        // entries across classes are exactly zero
        for (ca, a) in support.classes().iter().enumerate() {
            for (cb, b) in support.classes().iter().enumerate() {
                if ca != cb {
                    for &p in a {
                        for &q in b {
                            assert_eq!(rep.gram[(p, q)], C64::default());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn block_outer_products_sum_to_scaled_identity() {
    // Σ_{(i,a),(j,b)} Y Y* = (|S_c| / N_t) Id for the per-class blocks
    // Y^{(i,a),(j,b)}_{Θ,Θ′} = (X_Θ)*_{(i,a)} (X_Θ′)_{(j,b)} / (N_T N_R N_t).
    let cfg = RadarConfig::new(2, 2, 4, DopplerMode::Full).unwrap();
    let mut r = rng(5);
    for size in 1..=3 {
        let class = r.random_range(0..cfg.n_receive);
        let ks: Vec<usize> = rand::seq::index::sample(&mut r, cfg.class_capacity(), size).into_vec();
        let thetas: Vec<_> = ks.iter().map(|&k| cfg.class_member(class, k).unwrap()).collect();
        let xs: Vec<DMatrix<C64>> = thetas.iter().map(|t| build_x_theta(&cfg, t, DEFAULT_DENSE_CAP).unwrap()).collect();
        let dim = cfg.n_transmit * cfg.n_samples;
        let norm = 1.0 / (cfg.n_transmit * cfg.n_receive * cfg.n_samples) as f64;
        let mut total = DMatrix::<C64>::zeros(size, size);
        for u in 0..dim {
            for v in 0..dim {
                // Y[p][q] = Σ_rows conj(X_p[row, u]) X_q[row, v]
                let y = DMatrix::from_fn(size, size, |p, q| {
                    (0..xs[p].nrows()).map(|row| xs[p][(row, u)].conj() * xs[q][(row, v)]).sum::<C64>() * norm
                });
                total += &y * y.adjoint();
            }
        }
        let want = size as f64 / cfg.n_samples as f64;
        for p in 0..size {
            for q in 0..size {
                let target = if p == q { want } else { 0.0 };
                assert!((total[(p, q)] - C64::new(target, 0.0)).norm() < 1e-10, "{total}");
            }
        }
    }
}

#[test]
fn rip_oracle_is_coherent() {
    let cfg = RadarConfig::new(1, 1, 8, DopplerMode::DopplerFree).unwrap();
    let op = RadarOperator::new(cfg, generate_signals(&cfg, SignalFamily::ComplexGaussian, 4)).unwrap();
    let d1 = exact_rip_constant(&op, 1, DEFAULT_RIP_CAP).unwrap();
    let d2 = exact_rip_constant(&op, 2, DEFAULT_RIP_CAP).unwrap();
    let d3 = exact_rip_constant(&op, 3, DEFAULT_RIP_CAP).unwrap();
    assert!(d1 > 0.0 && d1 <= d2 && d2 <= d3);
    // s = 1 is the largest column-norm deviation
    let by_def = (0..cfg.grid_size())
        .map(|k| (mimo_cs::norm2(&op.scaled_column(&cfg.grid_index(k).unwrap()).unwrap()).powi(2) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!((d1 - by_def).abs() < 1e-12);
    assert!(matches!(exact_rip_constant(&op, 3, 10), Err(mimo_cs::Error::Size { .. })));
}

#[test]
fn conditions_on_an_orthonormal_support() {
    // Steinhaus, single transmitter, one target per class: Ã_S has orthonormal columns.
    let cfg = RadarConfig::new(1, 4, 16, DopplerMode::DopplerFree).unwrap();
    let op = RadarOperator::new(cfg, generate_signals(&cfg, SignalFamily::Steinhaus, 2)).unwrap();
    let support = sample_balanced_support(&cfg, 4, 1, 3).unwrap();
    let scene = make_scene(support, 1.0, 3).unwrap();
    let zero = vec![C64::default(); cfg.n_measurements()];
    let rep = check_conditions(&op, &scene, &zero, 1.0).unwrap();
    assert!((rep.c1.value - 1.0).abs() < 1e-12 && rep.c1.holds);
    assert!((rep.c5.value - 1.0).abs() < 1e-12 && rep.c5.holds);
    assert_eq!(rep.c3.value, 0.0);
    assert_eq!(rep.c4.value, 0.0);
    assert!(rep.c3.holds && rep.c4.holds);
    let mu = 1.0 / cfg.scale() * (2.0 * (cfg.grid_size() as f64).ln()).sqrt();
    assert!((rep.mu - mu).abs() < 1e-15);
}

#[test]
fn singular_gram_fails_every_condition() {
    // N_t = 1: every column of a class is the same vector up to phase.
    let cfg = RadarConfig::new(1, 1, 2, DopplerMode::Full).unwrap();
    let sig = mimo_cs::SignalSet::from_raw(&cfg, SignalFamily::Steinhaus, 0, vec![vec![C64::new(1.0, 0.0); 2]]).unwrap();
    let op = RadarOperator::new(cfg, sig).unwrap();
    // constant signal: delays do not change the column
    let support = SupportSet::from_linear(&cfg, [0, 2]).unwrap();
    let scene = make_scene(support, 1.0, 0).unwrap();
    let rep = check_conditions(&op, &scene, &[C64::default(); 2], 1.0).unwrap();
    assert!(!rep.c1.holds && rep.gram_condition > 1e12);
    assert!(!rep.all_hold());
}

#[test]
fn tail_probe_medians_follow_scaling() {
    let short = RadarConfig::new(2, 4, 16, DopplerMode::DopplerFree).unwrap();
    let long = RadarConfig::new(2, 4, 64, DopplerMode::DopplerFree).unwrap();
    let a = tail_probe_opnorm(&short, SignalFamily::ComplexGaussian, 1, EtaRule::Balanced(4), 200, 1).unwrap();
    let b = tail_probe_opnorm(&long, SignalFamily::ComplexGaussian, 1, EtaRule::Balanced(4), 200, 1).unwrap();
    assert!(a.median > 1.5 * b.median, "{} vs {}", a.median, b.median);
    let again = tail_probe_opnorm(&short, SignalFamily::ComplexGaussian, 1, EtaRule::Balanced(4), 200, 1).unwrap();
    assert_eq!(a, again);
}
