//! Small dense and banded linear-algebra helpers.

use std::ops::{Add, Mul};

use nalgebra::{ComplexField, DMatrix};

/// `y = T x` for the tridiagonal matrix with sub-diagonal `lower`
/// (row `i+1`, column `i`), main diagonal `diag` and super-diagonal `upper`.
pub fn tridiag_apply<T>(lower: &[f64], diag: &[f64], upper: &[f64], x: &[T], y: &mut [T])
where
    T: Copy + Mul<f64, Output = T> + Add<Output = T>,
{
    let n = diag.len();
    debug_assert!(x.len() == n && y.len() == n);
    if n == 1 {
        y[0] = x[0] * diag[0];
        return;
    }
    y[0] = x[0] * diag[0] + x[1] * upper[0];
    for i in 1..n - 1 {
        y[i] = x[i - 1] * lower[i - 1] + x[i] * diag[i] + x[i + 1] * upper[i];
    }
    y[n - 1] = x[n - 2] * lower[n - 2] + x[n - 1] * diag[n - 1];
}

/// LU factorisation of a tridiagonal matrix with partial pivoting
/// (the classic `gttrf`/`gttrs` pair), reusable for many right-hand sides.
#[derive(Clone, Debug)]
pub struct TridiagonalLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: ComplexField<RealField = f64> + Copy> TridiagonalLu<T> {
    /// Factorises; returns `None` if the matrix is numerically singular.
    pub fn new(lower: &[T], diag: &[T], upper: &[T]) -> Option<Self> {
        let n = diag.len();
        assert!(n >= 1 && lower.len() + 1 == n && upper.len() + 1 == n);
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    return None;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let scale = d.iter().fold(0.0_f64, |acc, x| acc.max(x.modulus()));
        if !(scale > 0.0) || d.iter().any(|x| x.modulus() <= scale * 1e-300 || !x.modulus().is_finite()) {
            return None;
        }
        Some(Self { dl, d, du, du2, swapped })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Overwrites `b` with the solution of `T x = b`.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let t = self.dl[i] * b[i];
                b[i + 1] -= t;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted in
/// descending order and eigenvector columns permuted to match.
pub fn symmetric_eigen_descending(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let eig = nalgebra::SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    (values, vectors)
}
