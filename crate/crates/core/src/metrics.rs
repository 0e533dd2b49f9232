//! Error metrics, the success criterion and the result record shared by all
//! recovery schemes.

use serde::{Deserialize, Serialize};

use crate::error::check_len;
use crate::{Error, Result};

/// Finite stand-in for `-inf` dB in serialized output.
pub const DB_FLOOR: f64 = -300.0;

/// Default success threshold on the NMSE, in dB.
pub const DEFAULT_SUCCESS_DB: f64 = -20.0;

/// How an iterative recovery ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl RecoveryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecoveryStatus::Converged => "converged",
            RecoveryStatus::MaxIters => "max-iters",
            RecoveryStatus::Diverged => "diverged",
        }
    }
}

/// Output of an iterative recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub estimate: Vec<f64>,
    pub iterations_run: usize,
    /// Residual standard deviation `||z||_2 / sqrt(m)` after each iteration.
    pub sigma_history: Vec<f64>,
    pub status: RecoveryStatus,
}

pub(crate) fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `10 log10(x)`; zero maps to `-inf`.
pub fn to_db(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * x.log10()
    }
}

/// Clamps a dB value to [`DB_FLOOR`] for serialization.
pub fn clamp_db(db: f64) -> f64 {
    if db.is_nan() {
        db
    } else {
        db.max(DB_FLOOR)
    }
}

/// Normalized squared error `||h_hat - h||^2 / ||h||^2`.
pub fn nmse(h_hat: &[f64], h: &[f64]) -> Result<f64> {
    check_len(h.len(), h_hat.len())?;
    let energy = sq_norm(h);
    if energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(sq_dist(h_hat, h) / energy)
}

/// [`nmse`] in dB; a perfect estimate gives `-inf`.
pub fn nmse_db(h_hat: &[f64], h: &[f64]) -> Result<f64> {
    nmse(h_hat, h).map(to_db)
}

/// Mean squared error over realizations in dB:
/// `10 log10( (1/R) sum_r ||h - h_hat_r||^2 )`.
///
/// Returns `-inf` when every estimate equals `h`.
pub fn mse_db<V: AsRef<[f64]>>(h: &[f64], estimates: &[V]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("mse_db needs at least one estimate".into()));
    }
    let mut total = 0.0;
    for est in estimates {
        let est = est.as_ref();
        check_len(h.len(), est.len())?;
        total += sq_dist(h, est);
    }
    Ok(mse_db_from_errors(&[total / estimates.len() as f64]))
}

/// MSE in dB from per-realization squared errors `||h - h_hat_r||^2`.
pub fn mse_db_from_errors(squared_errors: &[f64]) -> f64 {
    let mean = squared_errors.iter().sum::<f64>() / squared_errors.len() as f64;
    to_db(mean)
}

/// Success test; the boundary counts as success.
pub fn success(nmse_db: f64, threshold_db: f64) -> bool {
    nmse_db <= threshold_db
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nmse_examples() {
        let h = [1.0, 0.0, 0.0];
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert_eq!(nmse_db(&h, &h).unwrap(), f64::NEG_INFINITY);
        assert_eq!(nmse(&[0.0; 3], &h).unwrap(), 1.0);
        assert_eq!(nmse_db(&[0.0; 3], &h).unwrap(), 0.0);
        let v = nmse(&[0.9, 0.0, 0.1], &h).unwrap();
        assert!((v - 0.02).abs() < 1e-15);
    }

    #[test]
    fn nmse_rejects_zero_truth_and_length_mismatch() {
        assert!(matches!(nmse(&[1.0, 2.0], &[0.0, 0.0]), Err(Error::ZeroReference)));
        assert!(matches!(
            nmse(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mse_db_examples() {
        let h = [0.0, 0.0];
        assert!(mse_db(&h, &[[1.0, 0.0]]).unwrap().abs() < 1e-12);
        let v = mse_db(&h, &[[1.0, 0.0], [10.0, 0.0]]).unwrap();
        assert!((v - 10.0 * 50.5f64.log10()).abs() < 1e-12);
        assert!((v - 17.03).abs() < 5e-3);
        let h = [1.0, -2.0];
        assert_eq!(mse_db(&h, &[h]).unwrap(), f64::NEG_INFINITY);
        assert!(mse_db::<[f64; 2]>(&h, &[]).is_err());
    }

    #[test]
    fn success_boundary_inclusive() {
        assert!(success(-25.0, -20.0));
        assert!(success(-20.0, -20.0));
        assert!(!success(-5.0, -20.0));
        assert!(success(f64::NEG_INFINITY, DEFAULT_SUCCESS_DB));
    }

    #[test]
    fn clamp_uses_sentinel() {
        assert_eq!(clamp_db(f64::NEG_INFINITY), DB_FLOOR);
        assert_eq!(clamp_db(-12.5), -12.5);
    }

    proptest! {
        #[test]
        fn nmse_scale_covariant(
            h in proptest::collection::vec(-10.0f64..10.0, 1..20),
            noise in proptest::collection::vec(-1.0f64..1.0, 20),
            c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
        ) {
            prop_assume!(sq_norm(&h) > 1e-6);
            let est: Vec<f64> = h.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let a = nmse(&est, &h).unwrap();
            let hs: Vec<f64> = h.iter().map(|v| c * v).collect();
            let es: Vec<f64> = est.iter().map(|v| c * v).collect();
            let b = nmse(&es, &hs).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        }

        #[test]
        fn mse_db_identical_estimates(
            h in proptest::collection::vec(-5.0f64..5.0, 1..10),
            d in -1.0f64..1.0,
            reps in 1usize..8,
        ) {
            let est: Vec<f64> = h.iter().map(|v| v + d).collect();
            let single = mse_db(&h, &[est.clone()]).unwrap();
            let many = mse_db(&h, &vec![est; reps]).unwrap();
            prop_assert!((single - many).abs() < 1e-9 || single == many);
        }

        #[test]
        fn success_monotone(a in -100.0f64..100.0, b in -100.0f64..100.0, t in -50.0f64..0.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(!success(hi, t) || success(lo, t));
        }
    }
}
