//! Problem dimensions of a sparse recovery instance.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dimensions `(n, m, k)` of a recovery problem and the ratios derived
/// from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemGeometry {
    /// Signal length (number of channel taps).
    pub n: usize,
    /// Number of measurements (training length).
    pub m: usize,
    /// Number of nonzeros.
    pub k: usize,
    /// Indeterminacy `m / n`.
    pub delta: f64,
    /// Sparsity factor `k / n`.
    pub rho: f64,
    /// Normalized sparsity `k / m`.
    pub rho_prime: f64,
    /// Compression rate `n / m`.
    pub r: f64,
}

/// Builds the geometry of an `m x n` problem with `k` nonzeros.
pub fn geometry(n: usize, m: usize, k: usize) -> Result<ProblemGeometry> {
    if n == 0 {
        return Err(Error::InvalidGeometry("signal length n must be positive".into()));
    }
    if m == 0 {
        return Err(Error::InvalidGeometry("measurement count m must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidGeometry(format!("sparsity k={k} exceeds n={n}")));
    }
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    Ok(ProblemGeometry {
        n,
        m,
        k,
        delta: mf / nf,
        rho: kf / nf,
        rho_prime: kf / mf,
        r: nf / mf,
    })
}
