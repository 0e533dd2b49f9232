//! Asymptotic phase transition of l1 minimization (equivalently of AMP with
//! soft thresholding) in the `(delta, rho')` plane, from the minimax
//! threshold characterization
//!
//! ```text
//! rho'(delta) = max_{z >= 0} [1 - (2/delta) psi(z)] / [1 + z^2 - 2 psi(z)]
//! psi(z)      = (1 + z^2) Phi(-z) - z phi(z)
//! ```

use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `Phi(-z)` for the standard normal distribution.
fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Objective maximized over `z` for a given `delta`.
pub fn l1_transition_objective(delta: f64, z: f64) -> f64 {
    let psi = (1.0 + z * z) * normal_upper_tail(z) - z * normal_pdf(z);
    (1.0 - 2.0 / delta * psi) / (1.0 + z * z - 2.0 * psi)
}

const Z_MAX: f64 = 20.0;
const COARSE_STEP: f64 = 0.01;

/// Critical normalized sparsity `rho'` of the l1 phase transition at
/// indeterminacy `delta` in `(0, 1]`.
pub fn dmm_l1_curve(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} not in (0, 1]")));
    }
    if delta == 1.0 {
        // Supremum approached as z -> 0.
        return Ok(1.0);
    }
    let f = |z: f64| l1_transition_objective(delta, z);

    let steps = (Z_MAX / COARSE_STEP) as usize;
    let (mut best_i, mut best) = (1, f(COARSE_STEP));
    for i in 2..=steps {
        let v = f(i as f64 * COARSE_STEP);
        if v > best {
            best = v;
            best_i = i;
        }
    }

    // Golden-section refinement on the bracketing cells.
    let mut lo = (best_i as f64 - 1.0) * COARSE_STEP;
    let mut hi = (best_i as f64 + 1.0) * COARSE_STEP;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1.max(f64::MIN_POSITIVE)), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1.max(f64::MIN_POSITIVE));
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(best.max(f1).max(f2).clamp(0.0, 1.0))
}
