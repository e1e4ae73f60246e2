//! Row-major dense square matrices. The class count `s` is small, so nothing
//! here tries to be clever.

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// `diag(d) + lambda * u u'`.
    pub fn diagonal_plus_rank_one(d: &[f64], lambda: f64, u: &[f64]) -> Self {
        assert_eq!(d.len(), u.len());
        Self::from_fn(d.len(), |i, j| {
            let base = if i == j { d[i] } else { 0.0 };
            base + lambda * u[i] * u[j]
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, x.len());
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x' A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Sum of all entries, `1' A 1`.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

/// Inverse of `diag(q) + lambda * u u'` by the Sherman-Morrison formula,
/// `diag(1/q) - lambda / (1 + lambda * u' diag(1/q) u) * a a'` with `a = u / q`.
///
/// Returns `None` when some `|q_i| <= tol_q` or the denominator is `<= tol_den`.
pub fn sherman_morrison(q: &[f64], lambda: f64, u: &[f64], tol_q: f64, tol_den: f64) -> Option<Matrix> {
    assert_eq!(q.len(), u.len());
    if q.iter().any(|&qi| qi <= tol_q) {
        return None;
    }
    let a: Vec<f64> = u.iter().zip(q).map(|(ui, qi)| ui / qi).collect();
    let ua: f64 = u.iter().zip(&a).map(|(ui, ai)| ui * ai).sum();
    let den = 1.0 + lambda * ua;
    if den <= tol_den {
        return None;
    }
    let coef = lambda / den;
    Some(Matrix::from_fn(q.len(), |i, j| {
        let base = if i == j { 1.0 / q[i] } else { 0.0 };
        base - coef * a[i] * a[j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_inverse_of_two_by_two() {
        // [[1/4, 1/12], [1/12, 1/4]] = diag(1/6, 1/6) + (1/48) * (2,2)(2,2)'
        let inv = sherman_morrison(&[1.0 / 6.0, 1.0 / 6.0], 1.0 / 48.0, &[2.0, 2.0], 0.0, 0.0)
            .unwrap();
        let expected = [[4.5, -1.5], [-1.5, 4.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_diagonal_is_refused() {
        assert!(sherman_morrison(&[0.0, 1.0], 0.5, &[1.0, 1.0], 1e-12, 1e-12).is_none());
    }

    #[test]
    fn product_and_norms() {
        let a = Matrix::from_fn(2, |i, j| (i * 2 + j) as f64);
        let id = Matrix::identity(2);
        assert_eq!(a.mul(&id), a);
        assert_eq!(a.total(), 6.0);
        assert_eq!(a.norm_inf(), 5.0);
        assert_eq!(a.quadratic_form(&[1.0, 1.0]), 6.0);
        assert_eq!(a.principal(&[1]).get(0, 0), 3.0);
    }
}
