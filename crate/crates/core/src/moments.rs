//! Exact first and second moments of the homophilic-edge-count vector under
//! the uniform random coloring of a fixed profile.
//!
//! Everything is evaluated in exact rationals first (the formulas only touch
//! the graph through [`GraphSummary`], so this costs `O(s^2)` big-number
//! operations) and rounded to `f64` once.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::coloring::{falling_factorial, Profile};
use crate::graph::GraphSummary;
use crate::matrix::{sherman_morrison, Matrix};

/// Relative tolerance below which variances, diagonal terms, and
/// Sherman-Morrison denominators count as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    if num.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(num, den)
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact `E[M_i] = m c_i^(2) / n^(2)`.
pub fn exact_expected_counts(s: &GraphSummary, p: &Profile) -> Vec<BigRational> {
    let n2 = falling_factorial(s.n, 2);
    p.sizes()
        .iter()
        .map(|&c| ratio(falling_factorial(c, 2) * s.m, n2.clone()))
        .collect()
}

/// Exact `Var(M_i)`.
///
/// Falling-factorial ratios with a zero numerator are taken as zero, which
/// keeps the formula defined for small classes on tiny graphs.
pub fn exact_marginal_variances(s: &GraphSummary, p: &Profile) -> Vec<BigRational> {
    let n2 = falling_factorial(s.n, 2);
    let n3 = falling_factorial(s.n, 3);
    let n4 = falling_factorial(s.n, 4);
    let m = BigRational::from_integer(BigInt::from(s.m));
    let pi3 = BigRational::from_integer(BigInt::from(s.pi3));
    let pairs = BigRational::from_integer(BigInt::from(s.edge_pairs()));
    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));

    p.sizes()
        .iter()
        .map(|&c| {
            let k2 = ratio(falling_factorial(c, 2), n2.clone());
            let k3 = ratio(falling_factorial(c, 3), n3.clone());
            let k4 = ratio(falling_factorial(c, 4), n4.clone());
            let mean = &m * &k2;
            let single = &mean * (&one - &mean);
            let paired = (&k3 - &k4) * &pi3 + &k4 * &pairs;
            single + &two * paired
        })
        .collect()
}

/// `E[M_i]` as floats.
pub fn expected_counts(s: &GraphSummary, p: &Profile) -> Vec<f64> {
    exact_expected_counts(s, p).iter().map(to_f64).collect()
}

/// `Var(M_i)` as floats.
pub fn marginal_variances(s: &GraphSummary, p: &Profile) -> Vec<f64> {
    exact_marginal_variances(s, p).iter().map(to_f64).collect()
}

/// Per-class means and variances of the homophilic counts.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub mbar: Vec<f64>,
    pub var: Vec<f64>,
    #[serde(skip)]
    exact_mbar: Vec<BigRational>,
    #[serde(skip)]
    exact_var: Vec<BigRational>,
}

impl MomentSummary {
    pub fn compute(s: &GraphSummary, p: &Profile) -> Self {
        let exact_mbar = exact_expected_counts(s, p);
        let exact_var = exact_marginal_variances(s, p);
        MomentSummary {
            mbar: exact_mbar.iter().map(to_f64).collect(),
            var: exact_var.iter().map(to_f64).collect(),
            exact_mbar,
            exact_var,
        }
    }

    pub fn classes(&self) -> usize {
        self.mbar.len()
    }

    pub fn exact_mbar(&self) -> &[BigRational] {
        &self.exact_mbar
    }

    pub fn exact_var(&self) -> &[BigRational] {
        &self.exact_var
    }

    pub fn std_dev(&self) -> Vec<f64> {
        self.var.iter().map(|v| v.max(0.0).sqrt()).collect()
    }

    /// Absolute cutoff for "zero variance": `DEGENERACY_TOL` times the
    /// largest covariance entry, which for a covariance matrix is the
    /// largest variance.
    pub fn absolute_tolerance(&self) -> f64 {
        DEGENERACY_TOL * self.var.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Classes whose variance is distinguishable from zero.
    pub fn active_set(&self) -> Vec<usize> {
        let tol = self.absolute_tolerance();
        (0..self.classes())
            .filter(|&i| !self.exact_var[i].is_zero() && self.var[i] > tol)
            .collect()
    }
}

/// Full second-order structure `Sigma = Q + gamma u u'` with `u_i = c_i^(2)`.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceStructure {
    /// `None` when `n < 4`.
    pub gamma: Option<f64>,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub sigma: Matrix,
    /// Correlation matrix restricted to `active_set`.
    pub corr: Matrix,
    pub sigma_inv: Option<Matrix>,
    /// Inverse of `corr`, on the active set.
    pub corr_inv: Option<Matrix>,
    pub active_set: Vec<usize>,
    /// `true` when `Sigma` is not invertible through the rank-one route.
    pub degenerate: bool,
    pub tolerance: f64,
    #[serde(skip)]
    exact_gamma: Option<BigRational>,
    #[serde(skip)]
    exact_sigma: Vec<Vec<BigRational>>,
}

impl CovarianceStructure {
    pub fn classes(&self) -> usize {
        self.u.len()
    }

    pub fn exact_gamma(&self) -> Option<&BigRational> {
        self.exact_gamma.as_ref()
    }

    pub fn exact_sigma(&self) -> &[Vec<BigRational>] {
        &self.exact_sigma
    }

    /// Coefficient of the rank-one term; zero when `gamma` is undefined,
    /// in which case `Sigma` is diagonal.
    pub fn rank_one_coefficient(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }
}

/// Builds `Sigma`, the correlation matrix on the active set, and both
/// inverses via Sherman-Morrison when they exist.
pub fn covariance_structure(s: &GraphSummary, p: &Profile, ms: &MomentSummary) -> CovarianceStructure {
    let classes = p.classes();
    let u_exact: Vec<BigInt> = p.sizes().iter().map(|&c| falling_factorial(c, 2)).collect();
    let exact_gamma = s.gamma_exact();

    let mut exact_sigma = vec![vec![BigRational::zero(); classes]; classes];
    for i in 0..classes {
        for j in 0..classes {
            exact_sigma[i][j] = if i == j {
                ms.exact_var()[i].clone()
            } else {
                match &exact_gamma {
                    Some(g) => g * BigRational::from_integer(&u_exact[i] * &u_exact[j]),
                    // n < 4: no two disjoint edges exist, so E[M_i M_j] = 0.
                    None => -(&ms.exact_mbar()[i] * &ms.exact_mbar()[j]),
                }
            };
        }
    }
    let q_exact: Vec<BigRational> = (0..classes)
        .map(|i| match &exact_gamma {
            Some(g) => {
                let ui = BigRational::from_integer(u_exact[i].clone());
                &ms.exact_var()[i] - g * &ui * &ui
            }
            None => ms.exact_var()[i].clone(),
        })
        .collect();

    let gamma = exact_gamma.as_ref().map(to_f64);
    let lambda = gamma.unwrap_or(0.0);
    let u: Vec<f64> = u_exact.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    let q: Vec<f64> = q_exact.iter().map(to_f64).collect();
    let sigma = Matrix::from_fn(classes, |i, j| to_f64(&exact_sigma[i][j]));
    let tolerance = DEGENERACY_TOL * sigma.max_abs();

    let sigma_inv = sherman_morrison(&q, lambda, &u, tolerance, DEGENERACY_TOL);
    let degenerate = sigma_inv.is_none();

    let active_set = ms.active_set();
    let sd = ms.std_dev();
    let corr = Matrix::from_fn(active_set.len(), |a, b| {
        let (i, j) = (active_set[a], active_set[b]);
        if i == j {
            1.0
        } else {
            sigma.get(i, j) / (sd[i] * sd[j])
        }
    });
    let corr_inv = if active_set.is_empty() {
        None
    } else {
        let q_scaled: Vec<f64> = active_set.iter().map(|&i| q[i] / ms.var[i]).collect();
        let u_scaled: Vec<f64> = active_set.iter().map(|&i| u[i] / sd[i]).collect();
        sherman_morrison(&q_scaled, lambda, &u_scaled, DEGENERACY_TOL, DEGENERACY_TOL)
    };

    CovarianceStructure {
        gamma,
        u,
        q,
        sigma,
        corr,
        sigma_inv,
        corr_inv,
        active_set,
        degenerate,
        tolerance,
        exact_gamma,
        exact_sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn moments(n: usize, edges: &[(usize, usize)], sizes: &[u64]) -> (GraphSummary, Profile, MomentSummary) {
        let g = Graph::from_edges(n, edges).unwrap();
        let s = g.summarize();
        let p = Profile::new(sizes.to_vec()).unwrap();
        let ms = MomentSummary::compute(&s, &p);
        (s, p, ms)
    }

    const P3: &[(usize, usize)] = &[(0, 1), (1, 2)];
    const P4: &[(usize, usize)] = &[(0, 1), (1, 2), (2, 3)];
    const K4: &[(usize, usize)] = &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    const TWO_EDGES: &[(usize, usize)] = &[(0, 1), (2, 3)];
    const STAR: &[(usize, usize)] = &[(0, 1), (0, 2), (0, 3)];

    #[test]
    fn means() {
        let (_, _, ms) = moments(3, P3, &[2, 1]);
        assert_eq!(ms.exact_mbar(), &[rat(2, 3), rat(0, 1)]);
        let (_, _, ms) = moments(4, K4, &[2, 2]);
        assert_eq!(ms.exact_mbar(), &[rat(1, 1), rat(1, 1)]);
        let (_, _, ms) = moments(5, &[], &[3, 2]);
        assert_eq!(ms.mbar, vec![0.0, 0.0]);
    }

    #[test]
    fn variances() {
        let (_, _, ms) = moments(3, P3, &[2, 1]);
        assert_eq!(ms.exact_var(), &[rat(2, 9), rat(0, 1)]);
        let (_, _, ms) = moments(4, K4, &[2, 2]);
        assert_eq!(ms.exact_var(), &[rat(0, 1), rat(0, 1)]);
        let (_, _, ms) = moments(4, P4, &[2, 2]);
        assert_eq!(ms.exact_var(), &[rat(1, 4), rat(1, 4)]);
    }

    #[test]
    fn disjoint_edges_are_perfectly_correlated() {
        let (s, p, ms) = moments(4, TWO_EDGES, &[2, 2]);
        let cs = covariance_structure(&s, &p, &ms);
        assert_eq!(cs.exact_gamma(), Some(&rat(1, 18)));
        assert_eq!(cs.exact_sigma()[0][1], rat(2, 9));
        assert!((cs.corr.get(0, 1) - 1.0).abs() < 1e-12);
        assert!(cs.degenerate);
        assert!(cs.sigma_inv.is_none());
        assert!(cs.corr_inv.is_none());
        assert!(cs.q.iter().all(|q| q.abs() < 1e-15));
    }

    #[test]
    fn path_inverse() {
        let (s, p, ms) = moments(4, P4, &[2, 2]);
        let cs = covariance_structure(&s, &p, &ms);
        assert_eq!(cs.exact_sigma()[0][1], rat(1, 12));
        let inv = cs.sigma_inv.as_ref().unwrap();
        let expected = [[4.5, -1.5], [-1.5, 4.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
        let prod = cs.sigma.mul(inv);
        assert!(prod.sub(&Matrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn star_covariance_is_negative() {
        let (s, p, ms) = moments(4, STAR, &[2, 2]);
        let cs = covariance_structure(&s, &p, &ms);
        assert_eq!(cs.exact_gamma(), Some(&rat(-1, 16)));
        assert_eq!(cs.exact_sigma()[0][1], rat(-1, 4));
    }

    #[test]
    fn small_graphs_fall_back_to_diagonal() {
        let (s, p, ms) = moments(3, P3, &[2, 1]);
        let cs = covariance_structure(&s, &p, &ms);
        assert_eq!(cs.gamma, None);
        assert_eq!(cs.exact_sigma()[0][1], rat(0, 1));
        assert_eq!(cs.active_set, vec![0]);
        assert!(cs.degenerate);
        let corr_inv = cs.corr_inv.unwrap();
        assert_eq!(corr_inv.get(0, 0), 1.0);
    }

    #[test]
    fn complete_graph_has_no_active_class() {
        let (s, p, ms) = moments(4, K4, &[2, 2]);
        let cs = covariance_structure(&s, &p, &ms);
        assert!(cs.active_set.is_empty());
        assert!(cs.corr_inv.is_none());
        assert_eq!(cs.exact_gamma(), Some(&rat(0, 1)));
    }
}
