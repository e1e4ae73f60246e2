//! Ground truth for the closed forms: exhaustive enumeration of colorings,
//! seeded Monte Carlo tails, the exact matching-graph tail, and a scan of
//! gamma over all labelled trees.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::{count_with, random_coloring, Profile};
use crate::families::labelled_trees;
use crate::graph::{Graph, GraphSummary};
use crate::matrix::Matrix;
use crate::moments::{CovarianceStructure, MomentSummary};

pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} colorings exceed the enumeration limit of {limit}")]
    LimitExceeded { count: BigUint, limit: u64 },
    #[error("profile sums to {profile} but the graph has {vertices} vertices")]
    ProfileMismatch { profile: u64, vertices: usize },
    #[error("threshold k = {k} is outside 0..={max}")]
    ThresholdOutOfRange { k: u64, max: u64 },
    #[error("need at least one edge")]
    NoEdges,
    #[error("tree scan needs 2 <= n <= 8, got {0}")]
    TreeSize(usize),
}

/// Exact law of the homophilic-count vector for one graph and profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    profile: Profile,
    counts: BTreeMap<Vec<u64>, BigUint>,
    total: BigUint,
}

impl ExactDistribution {
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Number of colorings visited.
    pub fn colorings(&self) -> &BigUint {
        &self.total
    }

    pub fn probability(&self, outcome: &[u64]) -> BigRational {
        match self.counts.get(outcome) {
            Some(c) => self.mass(c),
            None => BigRational::zero(),
        }
    }

    fn mass(&self, count: &BigUint) -> BigRational {
        BigRational::new(BigInt::from(count.clone()), BigInt::from(self.total.clone()))
    }

    /// Support points with their exact probabilities, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&[u64], BigRational)> + '_ {
        self.counts.iter().map(|(o, c)| (o.as_slice(), self.mass(c)))
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn total_probability(&self) -> BigRational {
        self.support().map(|(_, p)| p).fold(BigRational::zero(), |a, b| a + b)
    }
}

/// Rearranges `xs` into the next lexicographic permutation; `false` at the end.
fn next_permutation(xs: &mut [u32]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Visits every coloring with profile `p` exactly once.
///
/// The space is split by the class of vertex 0; blocks run in parallel and
/// merge by adding integer counts, so the result does not depend on
/// scheduling.
pub fn enumerate_colorings(g: &Graph, p: &Profile, limit: u64) -> Result<ExactDistribution, OracleError> {
    if p.total() != g.vertex_count() as u64 {
        return Err(OracleError::ProfileMismatch {
            profile: p.total(),
            vertices: g.vertex_count(),
        });
    }
    let count = p.multinomial();
    if count > BigUint::from(limit) {
        return Err(OracleError::LimitExceeded { count, limit });
    }
    let classes = p.classes();
    let blocks: Vec<usize> = (0..classes).collect();
    let partials: Vec<BTreeMap<Vec<u64>, u64>> = blocks
        .par_iter()
        .map(|&first| {
            let mut local = BTreeMap::new();
            let mut sizes = p.sizes().to_vec();
            sizes[first] -= 1;
            let mut rest: Vec<u32> = sizes
                .iter()
                .enumerate()
                .flat_map(|(i, &c)| std::iter::repeat(i as u32).take(c as usize))
                .collect();
            let mut assignment = vec![first as u32; rest.len() + 1];
            loop {
                assignment[1..].copy_from_slice(&rest);
                *local.entry(count_with(g, &assignment, classes)).or_insert(0u64) += 1;
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            local
        })
        .collect();

    let mut counts: BTreeMap<Vec<u64>, BigUint> = BTreeMap::new();
    let mut total = BigUint::zero();
    for part in partials {
        for (outcome, c) in part {
            total += c;
            *counts.entry(outcome).or_insert_with(BigUint::zero) += c;
        }
    }
    debug_assert_eq!(total, count);
    Ok(ExactDistribution {
        profile: p.clone(),
        counts,
        total,
    })
}

/// Exact mean vector and covariance matrix of an enumerated law.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: Vec<BigRational>,
    pub cov: Vec<Vec<BigRational>>,
}

pub fn exact_moments(d: &ExactDistribution) -> ExactMoments {
    let s = d.profile.classes();
    let mut mean = vec![BigRational::zero(); s];
    let mut second = vec![vec![BigRational::zero(); s]; s];
    for (outcome, prob) in d.support() {
        for i in 0..s {
            let xi = BigRational::from_integer(BigInt::from(outcome[i]));
            mean[i] += &prob * &xi;
            for j in 0..s {
                let xj = BigInt::from(outcome[j]);
                second[i][j] += &prob * (&xi * BigRational::from_integer(xj));
            }
        }
    }
    let cov = (0..s)
        .map(|i| (0..s).map(|j| &second[i][j] - &mean[i] * &mean[j]).collect())
        .collect();
    ExactMoments { mean, cov }
}

/// Side of a tail event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    AtLeast,
    AtMost,
}

/// A real-valued statistic of the outcome vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    /// `x_i`
    Component(usize),
    /// `w' x`
    Linear(Vec<f64>),
    /// Mean z-score over the active classes.
    ZMean {
        mbar: Vec<f64>,
        sd: Vec<f64>,
        active: Vec<usize>,
    },
    /// Squared Mahalanobis norm `z_A' Gamma_A^{-1} z_A` over the active classes.
    Mahalanobis {
        mbar: Vec<f64>,
        sd: Vec<f64>,
        active: Vec<usize>,
        corr_inv: Matrix,
    },
}

impl Statistic {
    pub fn z_mean(ms: &MomentSummary) -> Self {
        Statistic::ZMean {
            mbar: ms.mbar.clone(),
            sd: ms.std_dev(),
            active: ms.active_set(),
        }
    }

    /// `None` when the correlation matrix is singular on the active set.
    pub fn mahalanobis(ms: &MomentSummary, cs: &CovarianceStructure) -> Option<Self> {
        Some(Statistic::Mahalanobis {
            mbar: ms.mbar.clone(),
            sd: ms.std_dev(),
            active: cs.active_set.clone(),
            corr_inv: cs.corr_inv.clone()?,
        })
    }

    pub fn eval(&self, x: &[u64]) -> f64 {
        match self {
            Statistic::Component(i) => x[*i] as f64,
            Statistic::Linear(w) => w.iter().zip(x).map(|(wi, &xi)| wi * xi as f64).sum(),
            Statistic::ZMean { mbar, sd, active } => {
                if active.is_empty() {
                    return 0.0;
                }
                let sum: f64 = active.iter().map(|&i| (x[i] as f64 - mbar[i]) / sd[i]).sum();
                sum / active.len() as f64
            }
            Statistic::Mahalanobis {
                mbar,
                sd,
                active,
                corr_inv,
            } => {
                let z: Vec<f64> = active.iter().map(|&i| (x[i] as f64 - mbar[i]) / sd[i]).collect();
                corr_inv.quadratic_form(&z)
            }
        }
    }

    /// Whether `value` lies on `side` of `threshold`. Values within a small
    /// relative tolerance of the threshold count as ties and are included.
    pub fn hits(value: f64, threshold: f64, side: Side) -> bool {
        let eps = 1e-9 * threshold.abs().max(1.0);
        match side {
            Side::AtLeast => value >= threshold - eps,
            Side::AtMost => value <= threshold + eps,
        }
    }
}

/// Exact probability that the statistic lies on `side` of `threshold`.
pub fn exact_tail(d: &ExactDistribution, stat: &Statistic, threshold: f64, side: Side) -> BigRational {
    let mut hit = BigUint::zero();
    for (outcome, count) in &d.counts {
        if Statistic::hits(stat.eval(outcome), threshold, side) {
            hit += count;
        }
    }
    d.mass(&hit)
}

/// Exact counterpart of index `a`: `1 - P(A(Z) >= A(z))` when `A(z) >= 0`,
/// `P(A(Z) <= A(z)) - 1` otherwise.
pub fn exact_index_a(d: &ExactDistribution, ms: &MomentSummary, observed: &[u64]) -> Option<BigRational> {
    let stat = Statistic::z_mean(ms);
    if ms.active_set().is_empty() {
        return None;
    }
    let a = stat.eval(observed);
    let one = BigRational::one();
    Some(if a >= 0.0 {
        one - exact_tail(d, &stat, a, Side::AtLeast)
    } else {
        exact_tail(d, &stat, a, Side::AtMost) - one
    })
}

/// Monte Carlo estimate of a tail probability with a 99% normal interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub samples: u64,
    /// Samples use seeds `first_seed, first_seed + 1, ...`.
    pub first_seed: u64,
}

impl TailEstimate {
    pub fn lower(&self) -> f64 {
        (self.estimate - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.estimate + self.half_width).min(1.0)
    }

    pub fn covers(&self, p: f64) -> bool {
        (self.estimate - p).abs() <= self.half_width
    }
}

/// Two-sided 99% standard normal quantile.
const Z_99: f64 = 2.575_829_303_548_900_4;

pub fn mc_tail(
    g: &Graph,
    p: &Profile,
    stat: &Statistic,
    threshold: f64,
    side: Side,
    samples: u64,
    seed: u64,
) -> TailEstimate {
    assert!(samples >= 1, "need at least one sample");
    let classes = p.classes();
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|k| {
            let f = random_coloring(p, seed.wrapping_add(k));
            let counts = count_with(g, f.assignment(), classes);
            Statistic::hits(stat.eval(&counts), threshold, side) as u64
        })
        .sum();
    let estimate = hits as f64 / samples as f64;
    let half_width = Z_99 * (estimate * (1.0 - estimate) / samples as f64).sqrt();
    TailEstimate {
        estimate,
        half_width,
        samples,
        first_seed: seed,
    }
}

/// Exact law of the number of red homophilic edges of a perfect matching
/// with `m` edges under the balanced profile `(m, m)`:
/// `P(M = t) = 2^m (m!)^2 / (2m)! * m! / (t! t! (m-2t)!) * 4^{-t}`.
pub fn matching_pmf(m: u64) -> Vec<BigRational> {
    let max = m / 2;
    // Integer weights w_t = m!/(t! t! (m-2t)!) * 2^(m-2t) count colorings
    // with t red and t blue homophilic edges; they sum to C(2m, m).
    let mut weights = Vec::with_capacity(max as usize + 1);
    let mut w = BigUint::one() << m; // t = 0: 2^m
    weights.push(w.clone());
    for t in 1..=max {
        // w_t / w_{t-1} = (m-2t+2)(m-2t+1) / (4 t^2)
        w *= (m - 2 * t + 2) * (m - 2 * t + 1);
        w /= 4 * t * t;
        weights.push(w.clone());
    }
    let total = BigInt::from(central_binomial(m));
    weights
        .into_iter()
        .map(|w| BigRational::new(BigInt::from(w), total.clone()))
        .collect()
}

fn central_binomial(m: u64) -> BigUint {
    let mut acc = BigUint::one();
    for k in 1..=m {
        acc *= m + k;
        acc /= k;
    }
    acc
}

/// `P(M_i >= k)` for the matching example, exactly.
pub fn matching_tail(m: u64, k: u64) -> Result<BigRational, OracleError> {
    check_matching(m, k)?;
    Ok(matching_pmf(m)[k as usize..]
        .iter()
        .fold(BigRational::zero(), |a, b| a + b))
}

fn check_matching(m: u64, k: u64) -> Result<(), OracleError> {
    if m == 0 {
        return Err(OracleError::NoEdges);
    }
    if k > m / 2 {
        return Err(OracleError::ThresholdOutOfRange { k, max: m / 2 });
    }
    Ok(())
}

fn ln_factorials(m: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(2 * m as usize + 1);
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    table.push(0.0);
    for k in 1..=2 * m {
        // Kahan-compensated running sum of ln k.
        let y = (k as f64).ln() - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        table.push(acc);
    }
    table
}

/// `ln P(M = t)` for `t = 0..=m/2`, from log-factorials; usable for large `m`.
pub fn ln_matching_pmf(m: u64) -> Vec<f64> {
    let lf = ln_factorials(m);
    let mu = m as usize;
    let ln4 = 4f64.ln();
    let norm = m as f64 * 2f64.ln() + 2.0 * lf[mu] - lf[2 * mu];
    (0..=mu / 2)
        .map(|t| norm + lf[mu] - 2.0 * lf[t] - lf[mu - 2 * t] - t as f64 * ln4)
        .collect()
}

/// Compensated `ln sum exp(x_i)`.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let peak = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let y = (x - peak).exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    peak + sum.ln()
}

/// Natural log of [`matching_tail`].
pub fn ln_matching_tail(m: u64, k: u64) -> Result<f64, OracleError> {
    check_matching(m, k)?;
    Ok(ln_sum_exp(&ln_matching_pmf(m)[k as usize..]))
}

pub fn matching_tail_f64(m: u64, k: u64) -> Result<f64, OracleError> {
    ln_matching_tail(m, k).map(f64::exp)
}

/// Extremes of gamma over all labelled trees on `n` vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeGammaScan {
    pub n: usize,
    pub trees: usize,
    /// `false` when `n < 4`, where gamma is undefined.
    pub defined: bool,
    pub max_gamma: Option<f64>,
    pub min_gamma: Option<f64>,
    pub maximizers: usize,
    pub minimizers: usize,
    pub paths: usize,
    pub stars: usize,
    pub maximizers_are_paths: bool,
    pub minimizers_are_stars: bool,
    #[serde(skip)]
    pub exact_max: Option<BigRational>,
    #[serde(skip)]
    pub exact_min: Option<BigRational>,
}

impl TreeGammaScan {
    /// Paths are exactly the maximizers and stars exactly the minimizers.
    pub fn extremes_are_paths_and_stars(&self) -> bool {
        self.defined
            && self.maximizers_are_paths
            && self.minimizers_are_stars
            && self.maximizers == self.paths
            && self.minimizers == self.stars
    }
}

pub fn tree_gamma_scan(n: usize) -> Result<TreeGammaScan, OracleError> {
    if !(2..=8).contains(&n) {
        return Err(OracleError::TreeSize(n));
    }
    struct Tree {
        gamma: Option<BigRational>,
        path: bool,
        star: bool,
    }
    let trees: Vec<Tree> = labelled_trees(n)
        .map(|edges| {
            let mut degrees = vec![0u32; n];
            for &(u, v) in &edges {
                degrees[u] += 1;
                degrees[v] += 1;
            }
            let leaves = degrees.iter().filter(|&&d| d == 1).count();
            let summary = GraphSummary::from_degrees(edges.len() as u64, &degrees);
            Tree {
                gamma: summary.gamma_exact(),
                path: leaves == 2,
                star: leaves == n - 1,
            }
        })
        .collect();
    let paths = trees.iter().filter(|t| t.path).count();
    let stars = trees.iter().filter(|t| t.star).count();

    if n < 4 {
        return Ok(TreeGammaScan {
            n,
            trees: trees.len(),
            defined: false,
            max_gamma: None,
            min_gamma: None,
            maximizers: 0,
            minimizers: 0,
            paths,
            stars,
            maximizers_are_paths: false,
            minimizers_are_stars: false,
            exact_max: None,
            exact_min: None,
        });
    }

    let gammas: Vec<&BigRational> = trees
        .iter()
        .map(|t| t.gamma.as_ref().expect("defined for n >= 4"))
        .collect();
    let max = gammas.iter().copied().max().expect("at least one tree").clone();
    let min = gammas.iter().copied().min().expect("at least one tree").clone();
    let is_max: Vec<bool> = gammas.iter().map(|g| **g == max).collect();
    let is_min: Vec<bool> = gammas.iter().map(|g| **g == min).collect();

    Ok(TreeGammaScan {
        n,
        trees: trees.len(),
        defined: true,
        max_gamma: max.to_f64(),
        min_gamma: min.to_f64(),
        maximizers: is_max.iter().filter(|&&b| b).count(),
        minimizers: is_min.iter().filter(|&&b| b).count(),
        paths,
        stars,
        maximizers_are_paths: trees.iter().zip(&is_max).all(|(t, &m)| !m || t.path),
        minimizers_are_stars: trees.iter().zip(&is_min).all(|(t, &m)| !m || t.star),
        exact_max: Some(max),
        exact_min: Some(min),
    })
}
