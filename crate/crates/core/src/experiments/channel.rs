//! Channel-estimation benchmark on the synthetic subband channel.
//!
//! One channel is drawn per master seed and kept fixed. For every training
//! length `m` and realization `r` a fresh BPSK training sequence and a fresh
//! noise vector are drawn, and every algorithm estimates the channel from the
//! same measurement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Algorithm;
use crate::amp::{default_tau_grid, tune_tau_oracle, AmpConfig, ThresholdKind};
use crate::baselines::{cosamp, least_squares, oracle_ls, COSAMP_DEFAULT_MAX_ITERS, COSAMP_DEFAULT_STOP_TOL};
use crate::metrics::{mse_db_from_errors, sq_dist};
use crate::seed::{derive, trial_seed};
use crate::sensing::toeplitz_bpsk_matrix;
use crate::signals::{add_noise, thz_like_channel, ChannelPreset, SparseSignal, DEFAULT_DECAY_RATE, DEFAULT_TAIL_FRACTION};
use crate::{Error, Result};

/// Stream index of the channel draw under the master seed.
const CHANNEL_STREAM: u64 = 0xC4A7_7E11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub preset: ChannelPreset,
    pub m_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Realizations `R` per training length.
    pub realizations: usize,
    pub snr_db: f64,
    pub master_seed: u64,
    pub decay_rate: f64,
    pub tail_fraction: f64,
    /// AMP settings; the threshold kind follows the algorithm and `tau` is tuned.
    pub config: AmpConfig,
    /// Oracle `tau` grid; `None` uses the default grid of each threshold kind.
    #[serde(default)]
    pub tau_grid: Option<Vec<f64>>,
    pub cosamp_max_iters: usize,
    pub cosamp_stop_tol: f64,
}

impl BenchmarkSpec {
    pub fn new(preset: ChannelPreset, m_values: Vec<usize>, algorithms: Vec<Algorithm>) -> Self {
        let snr_db = preset.snr_db;
        BenchmarkSpec {
            preset,
            m_values,
            algorithms,
            realizations: 20,
            snr_db,
            master_seed: 0,
            decay_rate: DEFAULT_DECAY_RATE,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            config: AmpConfig::default(),
            tau_grid: None,
            cosamp_max_iters: COSAMP_DEFAULT_MAX_ITERS,
            cosamp_stop_tol: COSAMP_DEFAULT_STOP_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.preset.validate()?;
        if self.realizations == 0 {
            return Err(Error::InvalidArgument("realizations must be >= 1".into()));
        }
        if self.m_values.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("benchmark needs m values and algorithms".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::InvalidArgument("SNR is NaN".into()));
        }
        if self.tau_grid.as_ref().is_some_and(|g| g.is_empty()) {
            return Err(Error::InvalidArgument("tau grid is empty".into()));
        }
        self.config.validate()
    }

    /// The grid searched for threshold kind `kind`.
    pub fn tau_grid_for(&self, kind: ThresholdKind) -> Vec<f64> {
        self.tau_grid.clone().unwrap_or_else(|| default_tau_grid(kind))
    }

    fn m_feasible(&self, m: usize) -> bool {
        m >= 1 && m >= self.preset.m_range.0 && m <= self.preset.m_range.1
    }

    fn algo_feasible(&self, algo: Algorithm, m: usize) -> bool {
        match algo {
            Algorithm::OptLs | Algorithm::Cosamp => self.preset.k <= m,
            _ => true,
        }
    }
}

/// Result of one `(m, algorithm)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub m: usize,
    pub algorithm: Algorithm,
    /// MSE over realizations in dB; NaN for skipped rows.
    pub mse_db: f64,
    pub trials: usize,
    /// `||h - h_hat_r||^2` per realization, in realization order.
    pub squared_errors: Vec<f64>,
    pub skipped: bool,
}

fn estimate(
    spec: &BenchmarkSpec,
    algo: Algorithm,
    a: &crate::sensing::SensingMatrix,
    y: &[f64],
    h: &SparseSignal,
) -> Result<Vec<f64>> {
    Ok(match algo {
        Algorithm::SAmp | Algorithm::HAmp => {
            let mut config = spec.config;
            config.thresholder.kind = if algo == Algorithm::SAmp {
                ThresholdKind::Soft
            } else {
                ThresholdKind::Hard
            };
            tune_tau_oracle(a, y, &h.values, &spec.tau_grid_for(config.thresholder.kind), &config)?.result.estimate
        }
        Algorithm::Cosamp => {
            cosamp(a, y, spec.preset.k, spec.cosamp_max_iters, spec.cosamp_stop_tol)?.estimate
        }
        Algorithm::Ls => least_squares(a, y)?,
        Algorithm::OptLs => oracle_ls(a, y, &h.support)?,
    })
}

/// Runs the benchmark; rows are ordered by `m`, then algorithm, as given in
/// the spec.
pub fn channel_benchmark(spec: &BenchmarkSpec) -> Result<Vec<BenchmarkRow>> {
    spec.validate()?;
    let h = thz_like_channel(
        &spec.preset,
        spec.decay_rate,
        spec.tail_fraction,
        derive(spec.master_seed, CHANNEL_STREAM),
    )?;

    let jobs: Vec<(usize, usize)> = spec
        .m_values
        .iter()
        .enumerate()
        .filter(|(_, m)| spec.m_feasible(**m))
        .flat_map(|(i, _)| (0..spec.realizations).map(move |r| (i, r)))
        .collect();

    // Per job: squared error of every algorithm (None when infeasible).
    let outcomes: Vec<Vec<Option<f64>>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let m = spec.m_values[i];
            let seed = trial_seed(spec.master_seed, i as u64, r as u64);
            let a = toeplitz_bpsk_matrix(m, spec.preset.n, derive(seed, 0))?;
            let clean = a.forward(&h.values)?;
            let (y, _) = add_noise(&clean, spec.snr_db, derive(seed, 1))?;
            spec.algorithms
                .iter()
                .map(|&algo| {
                    if !spec.algo_feasible(algo, m) {
                        return Ok(None);
                    }
                    let est = estimate(spec, algo, &a, &y, &h)?;
                    Ok(Some(sq_dist(&est, &h.values)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, &m) in spec.m_values.iter().enumerate() {
        for (a_idx, &algorithm) in spec.algorithms.iter().enumerate() {
            let errors: Vec<f64> = jobs
                .iter()
                .zip(&outcomes)
                .filter(|((ji, _), _)| *ji == i)
                .filter_map(|(_, errs)| errs[a_idx])
                .collect();
            let skipped = errors.is_empty();
            rows.push(BenchmarkRow {
                m,
                algorithm,
                mse_db: if skipped { f64::NAN } else { mse_db_from_errors(&errors) },
                trials: errors.len(),
                squared_errors: errors,
                skipped,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> BenchmarkSpec {
        let preset = ChannelPreset::custom(120, 4, (10, 400), 20.0).unwrap();
        let mut spec = BenchmarkSpec::new(preset, vec![5, 60, 500], vec![Algorithm::OptLs, Algorithm::Cosamp]);
        spec.realizations = 3;
        spec.tau_grid = Some(vec![1.0, 2.0]);
        spec
    }

    #[test]
    fn out_of_range_m_is_skipped() {
        let rows = channel_benchmark(&small_spec()).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows[0].skipped && rows[1].skipped);
        assert!(!rows[2].skipped && rows[2].trials == 3);
        assert!(rows[4].skipped && rows[5].skipped);
    }

    #[test]
    fn validation() {
        let mut spec = small_spec();
        spec.realizations = 0;
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.algorithms.clear();
        assert!(spec.validate().is_err());
    }
}
