//! Small dense kernels shared by the sensing operators and the least-squares
//! solvers.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Relative eigenvalue cutoff of the Gram pseudo-inverse, scaled by the
/// problem dimension.
const PINV_RTOL: f64 = f64::EPSILON;

/// Solves `G x = b` for a symmetric positive semidefinite Gram matrix.
///
/// Tries a Cholesky factorization first. When it fails, or the factor shows
/// the matrix is numerically singular, falls back to the eigenvalue
/// pseudo-inverse, which yields the minimum-norm solution.
pub(crate) fn solve_gram(gram: DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let dim = gram.nrows();
    if dim == 0 {
        return Vec::new();
    }
    let b = DVector::from_column_slice(rhs);
    let max_diag = gram.diagonal().iter().cloned().fold(0.0, f64::max);
    if max_diag == 0.0 {
        return vec![0.0; dim];
    }
    let cutoff = PINV_RTOL * dim as f64 * max_diag;
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let min_pivot = (0..dim).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        // Squared pivots bound the smallest eigenvalue from above; a clearly
        // positive value means the factorization is trustworthy.
        if min_pivot > 1e3 * cutoff {
            return chol.solve(&b).as_slice().to_vec();
        }
    }
    pinv_solve(gram, &b, cutoff)
}

fn pinv_solve(gram: DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> Vec<f64> {
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let thresh = cutoff.max(PINV_RTOL * lmax);
    let coeffs = eig.eigenvectors.transpose() * b;
    let mut x = DVector::zeros(b.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > thresh {
            x += eig.eigenvectors.column(i) * (coeffs[i] / lambda);
        }
    }
    x.as_slice().to_vec()
}

/// Solves `G x = b` by Cholesky; if `G` is numerically singular, solves
/// `(G + ridge * mean(diag G) I) x = b` instead.
pub(crate) fn solve_gram_ridge(gram: DMatrix<f64>, rhs: &[f64], ridge: f64) -> Vec<f64> {
    let dim = gram.nrows();
    if dim == 0 {
        return Vec::new();
    }
    let b = DVector::from_column_slice(rhs);
    let mean_diag = gram.trace() / dim as f64;
    if mean_diag == 0.0 {
        return vec![0.0; dim];
    }
    let cutoff = PINV_RTOL * dim as f64 * mean_diag;
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let min_pivot = (0..dim).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot > 1e3 * cutoff {
            return chol.solve(&b).as_slice().to_vec();
        }
    }
    let mut shifted = gram;
    for i in 0..dim {
        shifted[(i, i)] += ridge * mean_diag;
    }
    solve_gram(shifted, rhs)
}

/// Gram matrix `A_S^T A_S` of the selected columns.
pub(crate) fn column_gram(columns: &[&[f64]]) -> DMatrix<f64> {
    let k = columns.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = dot(columns[i], columns[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}
