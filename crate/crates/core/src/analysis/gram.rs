use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{transmit_phase, turns, RadarConfig, RadarOperator, SignalSet};
use crate::rng::{stream, tag};
use crate::support::SupportSet;
use crate::C64;

/// Above this size [`spectral_deviation`] switches to power iteration.
pub const EXACT_EIGEN_LIMIT: usize = 4096;

/// Gram condition numbers above this count as rank deficient.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Normalised Gram matrix of a support and its deviation from the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GramReport {
    /// `⟨Ã_Θ, Ã_Θ′⟩` in support order.
    pub gram: DMatrix<C64>,
    /// `‖Ã_S*Ã_S − Id‖₂→₂`.
    pub deviation: f64,
    /// Deviation of each angle-class block (0 for empty classes).
    pub block_deviations: Vec<f64>,
    /// Largest normalised off-diagonal magnitude within a class (0 if no class has two members).
    pub coherence_within: f64,
}

/// Gram matrix of `Ã_S` from the analytic correlation formula.
///
/// Entries across angle classes vanish identically. Within a class,
/// `(N_T N_t)⁻¹ Σ_{i,j} e^{2πi d_T Δβ [β′(j−1) − β(i−1)]}
///  Σ_a e^{2πi (f′−f)(τ+a−1)/N_t} conj(s_(i,a)) s_(j,b)` with
/// `b ≡ a − (τ′ − τ) mod N_t`.
pub fn gram_closed_form(cfg: &RadarConfig, sig: &SignalSet, support: &SupportSet) -> Result<GramReport> {
    if support.is_empty() {
        return Err(Error::domain("Gram matrix of an empty support"));
    }
    cfg.check_len("signal set", sig.n_transmit(), cfg.n_transmit)?;
    cfg.check_len("signal", sig.n_samples(), cfg.n_samples)?;
    let n = support.len();
    let nt = cfg.n_samples as i64;
    let ntx = cfg.n_transmit as i64;
    let norm = 1.0 / (cfg.n_transmit * cfg.n_samples) as f64;
    let mut gram = DMatrix::zeros(n, n);
    for members in support.classes() {
        for (ip, &p) in members.iter().enumerate() {
            for &q in &members[ip..] {
                let (a, b) = (support.indices()[p], support.indices()[q]);
                let (beta, tau, f) = (a.beta as i64, a.tau as i64, a.f as i64);
                let (beta2, tau2, f2) = (b.beta as i64, b.tau as i64, b.f as i64);
                let mut total = C64::default();
                for i in 1..=ntx {
                    let si = &sig.signals()[(i - 1) as usize];
                    let left = transmit_phase(cfg, beta, i).conj();
                    for j in 1..=ntx {
                        let sj = &sig.signals()[(j - 1) as usize];
                        let mut corr = C64::default();
                        for a1 in 1..=nt {
                            let b1 = (a1 - 1 - (tau2 - tau)).rem_euclid(nt);
                            let phase = turns(Rational64::new((f2 - f) * (tau + a1 - 1), nt));
                            corr += phase * si[(a1 - 1) as usize].conj() * sj[b1 as usize];
                        }
                        total += left * transmit_phase(cfg, beta2, j) * corr;
                    }
                }
                let v = total * norm;
                gram[(p, q)] = v;
                gram[(q, p)] = v.conj();
            }
        }
    }
    report(gram, support)
}

/// Gram matrix of `Ã_S` from explicit inner products of materialised columns.
pub fn gram_direct(op: &RadarOperator, support: &SupportSet) -> Result<GramReport> {
    if support.is_empty() {
        return Err(Error::domain("Gram matrix of an empty support"));
    }
    let cols = support
        .indices()
        .iter()
        .map(|theta| op.scaled_column(theta))
        .collect::<Result<Vec<_>>>()?;
    let n = cols.len();
    let gram = DMatrix::from_fn(n, n, |p, q| crate::inner(&cols[p], &cols[q]));
    report(gram, support)
}

fn report(gram: DMatrix<C64>, support: &SupportSet) -> Result<GramReport> {
    let mut block_deviations = Vec::with_capacity(support.classes().len());
    let mut coherence_within = 0.0f64;
    for members in support.classes() {
        if members.is_empty() {
            block_deviations.push(0.0);
            continue;
        }
        let block = DMatrix::from_fn(members.len(), members.len(), |r, c| gram[(members[r], members[c])]);
        block_deviations.push(spectral_deviation(&block)?);
        for (r, &p) in members.iter().enumerate() {
            for &q in &members[r + 1..] {
                let scale = (gram[(p, p)].re * gram[(q, q)].re).sqrt();
                if scale > 0.0 {
                    coherence_within = coherence_within.max(gram[(p, q)].norm() / scale);
                }
            }
        }
    }
    let deviation = block_deviations.iter().copied().fold(0.0, f64::max);
    Ok(GramReport { gram, deviation, block_deviations, coherence_within })
}

fn check_hermitian(m: &DMatrix<C64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    for r in 0..n {
        for c in r..n {
            let gap = (m[(r, c)] - m[(c, r)].conj()).norm();
            if gap > 1e-12 {
                return Err(Error::domain(format!(
                    "matrix is not Hermitian: entry ({r}, {c}) differs from its mirror by {gap:.3e}"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    // Symmetrise so tiny rounding asymmetries do not leak into the solver.
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `max |λ(G − Id)|` for a Hermitian `G`.
pub fn spectral_deviation(gram: &DMatrix<C64>) -> Result<f64> {
    check_hermitian(gram)?;
    if gram.nrows() > EXACT_EIGEN_LIMIT {
        return spectral_deviation_power(gram, 10_000, 0);
    }
    let ev = hermitian_eigenvalues(gram)?;
    Ok(ev.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max))
}

/// Power-iteration estimate of `max |λ(G − Id)|`, iterating with `(G − Id)²`
/// so eigenvalues of opposite sign do not cause oscillation.
pub fn spectral_deviation_power(gram: &DMatrix<C64>, max_iterations: usize, seed: u64) -> Result<f64> {
    check_hermitian(gram)?;
    let n = gram.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let b = gram - DMatrix::<C64>::identity(n, n);
    let mut rng = stream(seed, tag::POWER, &[n as u64]);
    let mut v = DVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    v /= C64::new(v.norm(), 0.0);
    let mut estimate = 0.0;
    for _ in 0..max_iterations {
        let bv = &b * &v;
        let next = bv.norm();
        let w = &b * &bv;
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(next);
        }
        v = w / C64::new(wn, 0.0);
        if (next - estimate).abs() <= 1e-15 * next.max(1e-300) {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}
