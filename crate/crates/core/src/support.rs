//! Angle classes, balancedness and random supports.

use std::f64::consts::TAU;

use num_rational::Ratio;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{GridIndex, RadarConfig};
use crate::rng::{stream, tag};
use crate::C64;

/// A set of distinct grid points, kept sorted in storage order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<GridIndex>,
    linear: Vec<usize>,
    /// Positions into `indices`, grouped by angle class.
    classes: Vec<Vec<usize>>,
}

impl SupportSet {
    pub fn new(cfg: &RadarConfig, indices: impl IntoIterator<Item = GridIndex>) -> Result<Self> {
        let mut pairs = indices
            .into_iter()
            .map(|theta| Ok((cfg.linear_index(&theta)?, theta)))
            .collect::<Result<Vec<_>>>()?;
        pairs.sort_unstable_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::domain(format!("duplicate support index {}", w[0].1)));
        }
        let mut classes = vec![Vec::new(); cfg.n_receive];
        for (pos, (_, theta)) in pairs.iter().enumerate() {
            classes[cfg.class_of(theta.beta)].push(pos);
        }
        let (linear, indices) = pairs.into_iter().unzip();
        Ok(SupportSet {
            indices,
            linear,
            classes,
        })
    }

    pub fn from_linear(cfg: &RadarConfig, linear: impl IntoIterator<Item = usize>) -> Result<Self> {
        let indices = linear
            .into_iter()
            .map(|k| cfg.grid_index(k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cfg, indices)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[GridIndex] {
        &self.indices
    }

    pub fn linear(&self) -> &[usize] {
        &self.linear
    }

    /// Positions (into [`SupportSet::indices`]) of the members of each angle class.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn contains_linear(&self, k: usize) -> bool {
        self.linear.binary_search(&k).is_ok()
    }
}

/// Balancedness `η = N_R max_c |S_c| / |S|` together with the class sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancednessReport {
    pub eta: Ratio<usize>,
    pub class_sizes: Vec<usize>,
}

impl BalancednessReport {
    pub fn eta_f64(&self) -> f64 {
        *self.eta.numer() as f64 / *self.eta.denom() as f64
    }
}

pub fn balancedness(cfg: &RadarConfig, support: &SupportSet) -> Result<BalancednessReport> {
    if support.is_empty() {
        return Err(Error::domain("balancedness of an empty support"));
    }
    let class_sizes = support.class_sizes();
    let largest = class_sizes.iter().copied().max().unwrap_or(0);
    Ok(BalancednessReport {
        eta: Ratio::new(cfg.n_receive * largest, support.len()),
        class_sizes,
    })
}

/// Check that an `η`-balanced support of size `s` can be produced by
/// [`sample_balanced_support`]; returns the per-class fill `η s / N_R`.
pub fn balanced_fill(cfg: &RadarConfig, s: usize, eta: usize) -> Result<usize> {
    let nr = cfg.n_receive;
    if s == 0 {
        return Err(Error::parameter("sparsity must be positive"));
    }
    if eta == 0 || nr % eta != 0 {
        return Err(Error::parameter(format!(
            "eta = {eta} must divide N_R = {nr}"
        )));
    }
    let n_classes = nr / eta;
    if s % n_classes != 0 {
        return Err(Error::parameter(format!(
            "s = {s} must be divisible by N_R/eta = {n_classes} to be exactly {eta}-balanced"
        )));
    }
    let fill = s / n_classes;
    if fill > cfg.class_capacity() {
        return Err(Error::parameter(format!(
            "{fill} indices per class exceed the class capacity {}",
            cfg.class_capacity()
        )));
    }
    Ok(fill)
}

/// Choose `N_R/η` angle classes uniformly and place `η s / N_R` indices in
/// each, uniformly without replacement.
pub fn sample_balanced_support(
    cfg: &RadarConfig,
    s: usize,
    eta: usize,
    seed: u64,
) -> Result<SupportSet> {
    let fill = balanced_fill(cfg, s, eta)?;
    let mut rng = stream(seed, tag::SUPPORT, &[s as u64, eta as u64]);
    let classes = index::sample(&mut rng, cfg.n_receive, cfg.n_receive / eta);
    let mut picked = Vec::with_capacity(s);
    for c in classes.iter() {
        for k in index::sample(&mut rng, cfg.class_capacity(), fill).iter() {
            picked.push(cfg.class_member(c, k)?);
        }
    }
    SupportSet::new(cfg, picked)
}

/// Uniform `s`-subset of the grid.
pub fn sample_unconstrained_support(cfg: &RadarConfig, s: usize, seed: u64) -> Result<SupportSet> {
    let n = cfg.grid_size();
    if s > n {
        return Err(Error::parameter(format!(
            "sparsity {s} exceeds grid size {n}"
        )));
    }
    let mut rng = stream(seed, tag::SUPPORT, &[s as u64]);
    SupportSet::from_linear(cfg, index::sample(&mut rng, n, s).iter())
}

/// As evenly spread as the class count allows: `⌈s/N_R⌉` or `⌊s/N_R⌋` per
/// class, with the classes receiving the larger share chosen uniformly.
pub fn sample_most_balanced_support(cfg: &RadarConfig, s: usize, seed: u64) -> Result<SupportSet> {
    let nr = cfg.n_receive;
    let (base, extra) = (s / nr, s % nr);
    let top = base + usize::from(extra > 0);
    if s == 0 || top > cfg.class_capacity() {
        return Err(Error::parameter(format!(
            "cannot spread {s} indices over {nr} classes of capacity {}",
            cfg.class_capacity()
        )));
    }
    let mut rng = stream(seed, tag::SUPPORT, &[s as u64, u64::MAX]);
    let heavy: Vec<usize> = index::sample(&mut rng, nr, extra).into_vec();
    let mut picked = Vec::with_capacity(s);
    for c in 0..nr {
        let fill = base + usize::from(heavy.contains(&c));
        for k in index::sample(&mut rng, cfg.class_capacity(), fill).iter() {
            picked.push(cfg.class_member(c, k)?);
        }
    }
    SupportSet::new(cfg, picked)
}

/// How a random support is spread over the angle classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EtaRule {
    /// Exactly `η`-balanced, see [`sample_balanced_support`].
    Balanced(usize),
    /// Uniform over all `s`-subsets of the grid.
    Free,
}

impl EtaRule {
    pub fn sample(self, cfg: &RadarConfig, s: usize, seed: u64) -> Result<SupportSet> {
        match self {
            EtaRule::Balanced(eta) => sample_balanced_support(cfg, s, eta, seed),
            EtaRule::Free => sample_unconstrained_support(cfg, s, seed),
        }
    }

    /// Whether a support of size `s` can be drawn under this rule.
    pub fn check(self, cfg: &RadarConfig, s: usize) -> Result<()> {
        match self {
            EtaRule::Balanced(eta) => balanced_fill(cfg, s, eta).map(|_| ()),
            EtaRule::Free if s == 0 || s > cfg.grid_size() => Err(Error::parameter(format!(
                "sparsity {s} is outside 1..={}",
                cfg.grid_size()
            ))),
            EtaRule::Free => Ok(()),
        }
    }
}

impl std::fmt::Display for EtaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EtaRule::Balanced(eta) => write!(f, "{eta}"),
            EtaRule::Free => f.write_str("free"),
        }
    }
}

impl std::str::FromStr for EtaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("free") {
            return Ok(EtaRule::Free);
        }
        match t.parse::<usize>() {
            Ok(eta) if eta > 0 => Ok(EtaRule::Balanced(eta)),
            _ => Err(Error::parameter(format!("eta must be a positive integer or `free`, got `{t}`"))),
        }
    }
}

/// A sparse target scene: support plus nonzero coefficients (same order).
#[derive(Clone, Debug, PartialEq)]
pub struct TargetScene {
    pub support: SupportSet,
    pub coefficients: Vec<C64>,
}

impl TargetScene {
    pub fn new(support: SupportSet, coefficients: Vec<C64>) -> Result<Self> {
        if support.len() != coefficients.len() {
            return Err(Error::domain(format!(
                "{} coefficients for a support of size {}",
                coefficients.len(),
                support.len()
            )));
        }
        if let Some(pos) = coefficients.iter().position(|c| *c == C64::default()) {
            return Err(Error::domain(format!(
                "coefficient at {} is zero",
                support.indices()[pos]
            )));
        }
        Ok(TargetScene {
            support,
            coefficients,
        })
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self, cfg: &RadarConfig) -> Vec<C64> {
        let mut x = vec![C64::default(); cfg.grid_size()];
        for (&k, &v) in self.support.linear().iter().zip(&self.coefficients) {
            x[k] = v;
        }
        x
    }

    pub fn entries(&self) -> Vec<(GridIndex, C64)> {
        self.support
            .indices()
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
            .collect()
    }

    /// `sgn(x_S)`.
    pub fn signs(&self) -> Vec<C64> {
        self.coefficients.iter().map(|c| c / c.norm()).collect()
    }

    pub fn min_magnitude(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Constant-magnitude scene with independent uniform phases.
pub fn make_scene(support: SupportSet, amplitude: f64, seed: u64) -> Result<TargetScene> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::parameter(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let mut rng = stream(seed, tag::PHASES, &[support.len() as u64]);
    let coefficients = (0..support.len())
        .map(|_| C64::from_polar(amplitude, TAU * rng.random::<f64>()))
        .collect();
    TargetScene::new(support, coefficients)
}

/// Smallest magnitude for which exact support recovery is guaranteed,
/// `8σ √(2 ln N) / √(N_T N_R N_t)`; experiments place targets exactly here.
pub fn threshold_amplitude(cfg: &RadarConfig, sigma: f64) -> f64 {
    8.0 * sigma * (2.0 * (cfg.grid_size() as f64).ln()).sqrt() / cfg.scale()
}
