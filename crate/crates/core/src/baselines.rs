//! Reference estimators: least squares, least squares on a known support,
//! and CoSaMP.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::check_len;
use crate::linalg::{column_gram, dot, solve_gram, solve_gram_ridge};
use crate::metrics::{sq_norm, RecoveryResult, RecoveryStatus};
use crate::sensing::SensingMatrix;
use crate::{Error, Result};

/// Relative ridge added to a singular CoSaMP least-squares system.
pub const COSAMP_RIDGE: f64 = 1e-10;
pub const COSAMP_DEFAULT_MAX_ITERS: usize = 100;
pub const COSAMP_DEFAULT_STOP_TOL: f64 = 1e-7;

/// Minimum-norm least-squares solution `A^+ y`.
///
/// For `m >= n` this is the ordinary least-squares fit; for `m < n` the
/// minimum-l2-norm vector among the best fits. Rank deficiency is handled
/// with pseudo-inverse semantics.
pub fn least_squares(a: &SensingMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    check_len(m, y.len())?;
    if m >= n {
        let cols: Vec<&[f64]> = (0..n).map(|j| a.column(j)).collect();
        let gram = column_gram(&cols);
        let rhs = a.adjoint_dense(y)?;
        Ok(solve_gram(gram, &rhs))
    } else {
        // x = A^T (A A^T)^+ y
        let rows: Vec<Vec<f64>> = (0..m).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
        let mut gram = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = dot(&rows[i], &rows[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let w = solve_gram(gram, y);
        a.adjoint_dense(&w)
    }
}

fn normalize_support(support: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("support index {bad} out of range for n={n}")));
    }
    Ok(s)
}

fn restricted_ls(a: &SensingMatrix, y: &[f64], support: &[usize], ridge: Option<f64>) -> Vec<f64> {
    let cols: Vec<&[f64]> = support.iter().map(|&j| a.column(j)).collect();
    let gram = column_gram(&cols);
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, y)).collect();
    match ridge {
        Some(r) => solve_gram_ridge(gram, &rhs, r),
        None => solve_gram(gram, &rhs),
    }
}

/// Least squares restricted to the columns in `support`, zero elsewhere.
pub fn oracle_ls(a: &SensingMatrix, y: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    check_len(m, y.len())?;
    let support = normalize_support(support, n)?;
    if support.len() > m {
        return Err(Error::OverdeterminedSupport { support: support.len(), rows: m });
    }
    let coef = restricted_ls(a, y, &support, None);
    let mut x = vec![0.0; n];
    for (&j, c) in support.iter().zip(coef) {
        x[j] = c;
    }
    Ok(x)
}

/// Indices of the `count` largest-magnitude entries, ties to the lower index.
pub fn top_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if count < idx.len() {
        let cmp = |a: &usize, b: &usize| {
            values[*b]
                .abs()
                .partial_cmp(&values[*a].abs())
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(b))
        };
        idx.select_nth_unstable_by(count, cmp);
        idx.truncate(count);
    }
    idx.sort_unstable();
    idx
}

/// Compressive sampling matching pursuit.
///
/// Each iteration merges the `2k` largest entries of the proxy `A^T r` with
/// the current support, solves least squares on the merged set, keeps the
/// `k` largest coefficients and updates the residual. Stops when the
/// relative change of `||r||` drops below `stop_tol` or after `max_iters`.
/// `sigma_history` records `||r|| / sqrt(m)`.
pub fn cosamp(
    a: &SensingMatrix,
    y: &[f64],
    k: usize,
    max_iters: usize,
    stop_tol: f64,
) -> Result<RecoveryResult> {
    let (m, n) = (a.rows(), a.cols());
    check_len(m, y.len())?;
    if k > n {
        return Err(Error::InvalidArgument(format!("sparsity k={k} exceeds n={n}")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
    }
    let mut x = vec![0.0; n];
    if k == 0 {
        return Ok(RecoveryResult {
            estimate: x,
            iterations_run: 0,
            sigma_history: Vec::new(),
            status: RecoveryStatus::Converged,
        });
    }

    let mut residual = y.to_vec();
    let mut res_norm = sq_norm(&residual).sqrt();
    let mut support: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut status = RecoveryStatus::MaxIters;

    for _ in 0..max_iters {
        let proxy = a.adjoint(&residual)?;
        let mut merged = top_indices(&proxy, (2 * k).min(n));
        merged.extend_from_slice(&support);
        merged.sort_unstable();
        merged.dedup();

        let coef = restricted_ls(a, y, &merged, Some(COSAMP_RIDGE));
        let keep = top_indices(&coef, k.min(merged.len()));
        x.fill(0.0);
        support = keep.iter().map(|&p| merged[p]).collect();
        for &p in &keep {
            x[merged[p]] = coef[p];
        }

        let ax = a.forward(&x)?;
        for ((r, yi), axi) in residual.iter_mut().zip(y).zip(&ax) {
            *r = yi - axi;
        }
        let new_norm = sq_norm(&residual).sqrt();
        history.push(new_norm / (m as f64).sqrt());
        let change = (res_norm - new_norm).abs() / res_norm.max(f64::MIN_POSITIVE);
        res_norm = new_norm;
        if new_norm == 0.0 || change < stop_tol {
            status = RecoveryStatus::Converged;
            break;
        }
    }
    Ok(RecoveryResult {
        estimate: x,
        iterations_run: history.len(),
        sigma_history: history,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::gaussian_matrix;
    use crate::signals::strictly_sparse;

    fn residual_norm(a: &SensingMatrix, x: &[f64], y: &[f64]) -> f64 {
        let ax = a.forward(x).unwrap();
        ax.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
    }

    #[test]
    fn square_exact_solve() {
        let a = gaussian_matrix(30, 30, 12).unwrap();
        let h: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).cos()).collect();
        let y = a.forward(&h).unwrap();
        let x = least_squares(&a, &y).unwrap();
        for (u, v) in x.iter().zip(&h) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn underdetermined_min_norm() {
        let a = gaussian_matrix(10, 25, 2).unwrap();
        let h: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        let y = a.forward(&h).unwrap();
        let x = least_squares(&a, &y).unwrap();
        assert!(residual_norm(&a, &x, &y) < 1e-8);
        // Minimum norm: x lies in the row space, i.e. x = A^T w. Equivalently
        // x is orthogonal to every null-space direction h - P h.
        let d: Vec<f64> = h.iter().zip(&x).map(|(u, v)| u - v).collect();
        assert!(residual_norm(&a, &d, &vec![0.0; 10]) < 1e-8);
        assert!(dot(&d, &x).abs() < 1e-8);
    }

    #[test]
    fn three_by_two_normal_equations() {
        // A (before normalization) = [[1,0],[1,1],[1,2]]; normalized columns
        // a1 = (1,1,1)/sqrt3, a2 = (0,1,2)/sqrt5.
        let a = SensingMatrix::from_row_major(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
        let y = [1.0, 2.0, 2.0];
        // Unnormalized normal equations: [[3,3],[3,5]] c = [5,6] -> c = (7/6, 1/2).
        // Normalized coefficients scale by the column norms.
        let want = [7.0 / 6.0 * 3f64.sqrt(), 0.5 * 5f64.sqrt()];
        let x = least_squares(&a, &y).unwrap();
        assert!((x[0] - want[0]).abs() < 1e-12 && (x[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_does_not_crash() {
        // Two identical columns.
        let a = SensingMatrix::from_row_major(3, 2, &[1.0, 1.0, 2.0, 2.0, 0.0, 0.0]).unwrap();
        let x = least_squares(&a, &[1.0, 2.0, 0.0]).unwrap();
        assert!((x[0] - x[1]).abs() < 1e-10);
        assert!(x.iter().all(|v| v.is_finite()));
        let a = SensingMatrix::from_row_major(2, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let x = least_squares(&a, &[1.0, 3.0]).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ls_first_order_optimality() {
        let a = gaussian_matrix(40, 15, 6).unwrap();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin()).collect();
        let x = least_squares(&a, &y).unwrap();
        let base = residual_norm(&a, &x, &y);
        let mut rng = crate::seed::rng(3);
        use rand::Rng as _;
        for _ in 0..100 {
            let p: Vec<f64> = x.iter().map(|v| v + 1e-4 * rng.random_range(-1.0..1.0)).collect();
            assert!(residual_norm(&a, &p, &y) >= base - 1e-8);
        }
    }

    #[test]
    fn oracle_ls_cases() {
        let a = gaussian_matrix(20, 50, 9).unwrap();
        let h = strictly_sparse(50, 4, 9).unwrap();
        let y = a.forward(&h.values).unwrap();
        let x = oracle_ls(&a, &y, &h.support).unwrap();
        for (u, v) in x.iter().zip(&h.values) {
            assert!((u - v).abs() < 1e-8);
        }
        for i in 0..50 {
            if !h.support.contains(&i) {
                assert_eq!(x[i], 0.0);
            }
        }
        let all: Vec<usize> = (0..21).collect();
        assert!(matches!(
            oracle_ls(&a, &y, &all),
            Err(Error::OverdeterminedSupport { support: 21, rows: 20 })
        ));
        assert!(oracle_ls(&a, &y, &[50]).is_err());

        let sq = gaussian_matrix(12, 8, 1).unwrap();
        let ys: Vec<f64> = (0..12).map(|i| i as f64 * 0.1 - 0.3).collect();
        let full: Vec<usize> = (0..8).collect();
        let x1 = oracle_ls(&sq, &ys, &full).unwrap();
        let x2 = least_squares(&sq, &ys).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_ls_noisy_restricted() {
        // Independent restricted solve through nalgebra's SVD pseudo-inverse.
        let a = gaussian_matrix(6, 5, 17).unwrap();
        let y = [0.3, -1.2, 0.8, 2.0, -0.4, 0.05];
        let support = [1, 3];
        let x = oracle_ls(&a, &y, &support).unwrap();
        let sub = DMatrix::from_fn(6, 2, |i, j| a.get(i, support[j]));
        let pinv = sub.pseudo_inverse(1e-14).unwrap();
        let want = pinv * nalgebra::DVector::from_column_slice(&y);
        assert!((x[1] - want[0]).abs() < 1e-12 && (x[3] - want[1]).abs() < 1e-12);
        assert_eq!([x[0], x[2], x[4]], [0.0; 3]);
    }

    #[test]
    fn cosamp_zero_sparsity() {
        let a = gaussian_matrix(8, 16, 1).unwrap();
        let r = cosamp(&a, &[1.0; 8], 0, 10, 1e-7).unwrap();
        assert!(r.estimate.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cosamp_orthonormal_one_step() {
        let eye: Vec<f64> = (0..36).map(|i| if i % 7 == 0 { 1.0 } else { 0.0 }).collect();
        let a = SensingMatrix::from_row_major(6, 6, &eye).unwrap();
        let y = [0.1, -3.0, 0.5, 2.0, -0.2, 0.0];
        let r = cosamp(&a, &y, 2, 1, 1e-7).unwrap();
        assert_eq!(r.estimate, vec![0.0, -3.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn cosamp_sparsity_bound() {
        let a = gaussian_matrix(30, 60, 3).unwrap();
        let y: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        for k in 1..10 {
            let r = cosamp(&a, &y, k, 20, 1e-7).unwrap();
            assert!(r.estimate.iter().filter(|v| **v != 0.0).count() <= k);
        }
    }

    #[test]
    fn top_indices_ties() {
        assert_eq!(top_indices(&[1.0, -1.0, 1.0, 0.5], 2), vec![0, 1]);
        assert_eq!(top_indices(&[0.0, 3.0], 5), vec![0, 1]);
    }
}
