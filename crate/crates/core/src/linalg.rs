//! Tridiagonal and block-tridiagonal solvers for interior Dirichlet systems.

use nalgebra::{DMatrix, DVector};

/// Factorization of the constant-coefficient tridiagonal matrix
/// `tridiag(off, diag, off)` of size `n`, by the Thomas algorithm.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    off: f64,
    // modified pivots
    pivots: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn new(n: usize, diag: f64, off: f64) -> Tridiagonal {
        let mut pivots = Vec::with_capacity(n);
        let mut prev = diag;
        pivots.push(prev);
        for _ in 1..n {
            prev = diag - off * off / prev;
            pivots.push(prev);
        }
        Tridiagonal { off, pivots }
    }

    /// Solves in place.
    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        let n = self.pivots.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 1..n {
            rhs[i] -= self.off / self.pivots[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.off * rhs[i + 1]) / self.pivots[i];
        }
    }
}

/// Solves `c x_{i-1} + D_i x_i + c x_{i+1} = r_i` with `N x N` diagonal
/// blocks and scalar-identity coupling `c`. Returns `None` when a modified
/// pivot block is singular.
pub(crate) fn solve_block_tridiagonal(
    diag: Vec<DMatrix<f64>>,
    coupling: f64,
    rhs: Vec<DVector<f64>>,
) -> Option<Vec<DVector<f64>>> {
    let n = diag.len();
    let scale = diag.iter().map(|d| d.amax()).fold(0.0f64, f64::max).max(coupling.abs());
    let mut inverses: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut reduced: Vec<DVector<f64>> = Vec::with_capacity(n);
    for (i, (d, r)) in diag.into_iter().zip(rhs).enumerate() {
        let (pivot, r) = if i == 0 {
            (d, r)
        } else {
            let prev_inv = &inverses[i - 1];
            let pivot = d - prev_inv * (coupling * coupling);
            let r = r - prev_inv * &reduced[i - 1] * coupling;
            (pivot, r)
        };
        let lu = pivot.clone().lu();
        // reject numerically singular pivots relative to the matrix scale
        let det = lu.determinant();
        if !det.is_finite() || det.abs() <= (1e-14 * scale).powi(pivot.nrows() as i32) {
            return None;
        }
        inverses.push(lu.try_inverse()?);
        reduced.push(r);
    }
    let mut x = vec![DVector::zeros(0); n];
    x[n - 1] = &inverses[n - 1] * &reduced[n - 1];
    for i in (0..n - 1).rev() {
        let r = &reduced[i] - &x[i + 1] * coupling;
        x[i] = &inverses[i] * r;
    }
    if x.iter().any(|v| v.iter().any(|e| !e.is_finite())) {
        return None;
    }
    Some(x)
}
