//! Approximate message passing with soft or hard thresholding.
//!
//! One iteration performs the linear step
//!
//! ```text
//! z^t     = y - A h^t + (1/delta) z^{t-1} <eta'(A^T z^{t-1} + h^{t-1})>
//! sigma_t = ||z^t||_2 / sqrt(m)
//! ```
//!
//! followed by the element-wise nonlinear step
//! `h^{t+1} = eta(A^T z^t + h^t)` with threshold `tau * sigma_t`. The last
//! term of the linear step is the Onsager correction; `<.>` is the empirical
//! mean over the `n` entries.
//!
//! Iteration starts from `h^0 = 0`, `z^0 = y` with no Onsager term at `t = 0`.

use serde::{Deserialize, Serialize};

use crate::error::check_len;
use crate::metrics::{nmse, sq_dist, sq_norm, RecoveryResult, RecoveryStatus};
use crate::sensing::SensingMatrix;
use crate::{Error, Result};

/// Denominator floor of the relative-change stopping rule.
pub const REL_CHANGE_EPS: f64 = 1e-12;

/// Thresholding nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    Soft,
    Hard,
}

/// Shrinks `a` toward zero by `theta`. `|a| <= theta` maps to zero.
#[inline]
pub fn soft_threshold(a: f64, theta: f64) -> f64 {
    if a > theta {
        a - theta
    } else if a < -theta {
        a + theta
    } else {
        0.0
    }
}

/// Keeps `a` when `|a| >= theta`, zero otherwise.
#[inline]
pub fn hard_threshold(a: f64, theta: f64) -> f64 {
    if a.abs() >= theta {
        a
    } else {
        0.0
    }
}

/// Mean of the thresholder derivative over `v`: the fraction of entries with
/// `|v_i| > theta`. Both nonlinearities have slope one on their pass-through
/// region and zero where they output zero.
pub fn onsager_coefficient(v: &[f64], theta: f64, _kind: ThresholdKind) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let passed = v.iter().filter(|x| x.abs() > theta).count();
    passed as f64 / v.len() as f64
}

/// Threshold kind and the multiplier `tau` applied to the residual
/// standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholder {
    pub kind: ThresholdKind,
    pub tau: f64,
}

impl Thresholder {
    pub fn soft(tau: f64) -> Self {
        Thresholder { kind: ThresholdKind::Soft, tau }
    }

    pub fn hard(tau: f64) -> Self {
        Thresholder { kind: ThresholdKind::Hard, tau }
    }

    #[inline]
    pub fn apply(&self, a: f64, theta: f64) -> f64 {
        match self.kind {
            ThresholdKind::Soft => soft_threshold(a, theta),
            ThresholdKind::Hard => hard_threshold(a, theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmpConfig {
    pub thresholder: Thresholder,
    pub max_iters: usize,
    /// Stop once `||h^{t+1} - h^t|| / max(||h^t||, 1e-12)` drops below this.
    pub stop_tol: f64,
    /// Declare divergence once `sigma_t` exceeds this multiple of the
    /// smallest earlier `sigma`.
    pub divergence_factor: f64,
    /// Include the Onsager correction. Turning it off gives plain iterative
    /// thresholding with the same threshold rule.
    pub onsager: bool,
}

impl Default for AmpConfig {
    fn default() -> Self {
        AmpConfig {
            thresholder: Thresholder::soft(1.0),
            max_iters: 200,
            stop_tol: 1e-8,
            divergence_factor: 10.0,
            onsager: true,
        }
    }
}

impl AmpConfig {
    pub fn soft(tau: f64) -> Self {
        AmpConfig { thresholder: Thresholder::soft(tau), ..Default::default() }
    }

    pub fn hard(tau: f64) -> Self {
        AmpConfig { thresholder: Thresholder::hard(tau), ..Default::default() }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.thresholder.tau = tau;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thresholder.tau >= 0.0 && self.thresholder.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be >= 0, got {}", self.thresholder.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidArgument("stop_tol must be >= 0".into()));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidArgument("divergence_factor must be > 1".into()));
        }
        Ok(())
    }
}

/// Iterate of the AMP recursion.
///
/// `z` and `sigma` are the most recently computed residual and its
/// standard deviation, `h_hat` the estimate that the next iteration starts
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    pub h_hat: Vec<f64>,
    pub z: Vec<f64>,
    pub z_prev: Vec<f64>,
    pub h_hat_prev: Vec<f64>,
    pub sigma: f64,
    pub t: usize,
    /// `<eta'>` of the last nonlinear step; zero before the first one.
    pub derivative_mean: f64,
    pseudo_data: Vec<f64>,
}

impl AmpState {
    /// `h^0 = 0`, `z^0 = y`.
    pub fn new(a: &SensingMatrix, y: &[f64]) -> Result<Self> {
        check_len(a.rows(), y.len())?;
        let n = a.cols();
        Ok(AmpState {
            h_hat: vec![0.0; n],
            z: y.to_vec(),
            z_prev: vec![0.0; y.len()],
            h_hat_prev: vec![0.0; n],
            sigma: (sq_norm(y) / y.len() as f64).sqrt(),
            t: 0,
            derivative_mean: 0.0,
            pseudo_data: vec![0.0; n],
        })
    }
}

/// One AMP iteration: residual with Onsager correction, `sigma`, then the
/// thresholding step.
pub fn amp_iterate(
    mut state: AmpState,
    a: &SensingMatrix,
    y: &[f64],
    config: &AmpConfig,
) -> Result<AmpState> {
    let (m, n) = (a.rows(), a.cols());
    check_len(m, y.len())?;
    check_len(n, state.h_hat.len())?;
    check_len(m, state.z.len())?;
    check_len(n, state.pseudo_data.len())?;

    // Linear step. The old residual moves to z_prev, the new one is built in
    // the recycled buffer.
    std::mem::swap(&mut state.z, &mut state.z_prev);
    a.forward_into(&state.h_hat, &mut state.z);
    let onsager = if config.onsager && state.t > 0 {
        state.derivative_mean / a.delta()
    } else {
        0.0
    };
    for ((zi, yi), zp) in state.z.iter_mut().zip(y).zip(&state.z_prev) {
        *zi = yi - *zi + onsager * zp;
    }
    state.sigma = (sq_norm(&state.z) / m as f64).sqrt();

    // Nonlinear step on the pseudo-data A^T z + h.
    a.adjoint_into(&state.z, &mut state.pseudo_data);
    for (p, h) in state.pseudo_data.iter_mut().zip(&state.h_hat) {
        *p += h;
    }
    let theta = config.thresholder.tau * state.sigma;
    std::mem::swap(&mut state.h_hat, &mut state.h_hat_prev);
    for (h, &v) in state.h_hat.iter_mut().zip(&state.pseudo_data) {
        *h = config.thresholder.apply(v, theta);
    }
    state.derivative_mean = onsager_coefficient(&state.pseudo_data, theta, config.thresholder.kind);
    state.t += 1;
    Ok(state)
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Runs AMP from `h^0 = 0` until the relative change of the estimate falls
/// below `stop_tol`, `max_iters` is reached, or the residual blows up.
///
/// Divergence is reported through [`RecoveryStatus::Diverged`], not as an
/// error; the estimate is then the iterate with the smallest residual seen.
pub fn amp_run(a: &SensingMatrix, y: &[f64], config: &AmpConfig) -> Result<RecoveryResult> {
    config.validate()?;
    let mut state = AmpState::new(a, y)?;
    let mut history = Vec::with_capacity(config.max_iters.min(1024));
    // Guard against declaring divergence off a residual at rounding level.
    let sigma_floor = f64::EPSILON * state.sigma;
    let mut min_sigma = f64::INFINITY;
    let mut best: Option<Vec<f64>> = None;

    for _ in 0..config.max_iters {
        state = amp_iterate(state, a, y, config)?;
        let sigma = state.sigma;
        history.push(sigma);

        // h_hat_prev is the estimate that produced the residual behind sigma.
        let blown_up = !sigma.is_finite()
            || !all_finite(&state.h_hat)
            || (min_sigma.is_finite() && sigma > config.divergence_factor * min_sigma.max(sigma_floor));
        if blown_up {
            let estimate = match best {
                Some(b) => b,
                None if all_finite(&state.h_hat_prev) => state.h_hat_prev,
                None => vec![0.0; a.cols()],
            };
            return Ok(RecoveryResult {
                estimate,
                iterations_run: state.t,
                sigma_history: history,
                status: RecoveryStatus::Diverged,
            });
        }
        if sigma < min_sigma {
            min_sigma = sigma;
            match &mut best {
                Some(b) => b.copy_from_slice(&state.h_hat_prev),
                None => best = Some(state.h_hat_prev.clone()),
            }
        }

        let change = sq_dist(&state.h_hat, &state.h_hat_prev).sqrt();
        let reference = sq_norm(&state.h_hat_prev).sqrt().max(REL_CHANGE_EPS);
        if change / reference < config.stop_tol {
            return Ok(RecoveryResult {
                estimate: state.h_hat,
                iterations_run: state.t,
                sigma_history: history,
                status: RecoveryStatus::Converged,
            });
        }
    }
    Ok(RecoveryResult {
        estimate: state.h_hat,
        iterations_run: state.t,
        sigma_history: history,
        status: RecoveryStatus::MaxIters,
    })
}

/// Oracle search grid in steps of 0.1: up to 3.0 for soft thresholding and
/// up to 8.0 for hard thresholding, whose best `tau` sits well above 3.
pub fn default_tau_grid(kind: ThresholdKind) -> Vec<f64> {
    let top = match kind {
        ThresholdKind::Soft => 30,
        ThresholdKind::Hard => 80,
    };
    (1..=top).map(|i| i as f64 / 10.0).collect()
}

/// Outcome of an oracle threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSearch {
    pub best_tau: f64,
    /// NMSE of the best run against the true vector (linear scale).
    pub nmse: f64,
    pub result: RecoveryResult,
}

/// Runs AMP for every `tau` in the grid and keeps the run with the smallest
/// NMSE against `h_true`; ties go to the smaller `tau`.
pub fn tune_tau_oracle(
    a: &SensingMatrix,
    y: &[f64],
    h_true: &[f64],
    tau_grid: &[f64],
    config: &AmpConfig,
) -> Result<TauSearch> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidArgument("tau grid is empty".into()));
    }
    check_len(a.cols(), h_true.len())?;
    if sq_norm(h_true) == 0.0 {
        return Err(Error::ZeroReference);
    }
    let mut best: Option<TauSearch> = None;
    for &tau in tau_grid {
        let result = amp_run(a, y, &config.with_tau(tau))?;
        let err = nmse(&result.estimate, h_true)?;
        let err = if err.is_finite() { err } else { f64::INFINITY };
        let better = match &best {
            None => true,
            Some(b) => err < b.nmse || (err == b.nmse && tau < b.best_tau),
        };
        if better {
            best = Some(TauSearch { best_tau: tau, nmse: err, result });
        }
    }
    Ok(best.expect("grid is non-empty"))
}
