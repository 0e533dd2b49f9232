#![allow(dead_code)]

use ampcs::sensing::SensingMatrix;
use nalgebra::{DMatrix, DVector};

pub fn dense(a: &SensingMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive l0 search: least squares on every support of size `k`, keeping
/// the one with the smallest residual.
pub fn exhaustive_l0(a: &SensingMatrix, y: &[f64], k: usize) -> Vec<f64> {
    let full = dense(a);
    let yv = DVector::from_column_slice(y);
    let mut best = (f64::INFINITY, vec![0.0; a.cols()]);
    for s in subsets(a.cols(), k) {
        let sub = full.select_columns(&s);
        let coef = sub.clone().svd(true, true).solve(&yv, 1e-13).unwrap();
        let res = (&yv - &sub * &coef).norm();
        if res < best.0 {
            let mut x = vec![0.0; a.cols()];
            for (idx, &j) in s.iter().enumerate() {
                x[j] = coef[idx];
            }
            best = (res, x);
        }
    }
    best.1
}
