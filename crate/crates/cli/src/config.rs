//! Per-command run configurations.
//!
//! Every config is read from JSON (unknown keys are rejected), patched with
//! command-line flags and then resolved: defaults that depend on other fields
//! are filled in, so the serialized form written to the manifest is complete
//! and reproduces the run on its own.

use std::path::PathBuf;

use ampcs::amp::AmpConfig;
use ampcs::baselines::{COSAMP_DEFAULT_MAX_ITERS, COSAMP_DEFAULT_STOP_TOL};
use ampcs::experiments::{Algorithm, BenchmarkSpec, NPolicy, PhaseGridSpec, RhoAxis};
use ampcs::metrics::DEFAULT_SUCCESS_DB;
use ampcs::sensing::MatrixKind;
use ampcs::signals::{ChannelPreset, DEFAULT_DECAY_RATE, DEFAULT_TAIL_FRACTION};
use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// `step, 2 step, ..., count step`, each value rounded once.
fn grid(count: usize, denom: f64) -> Vec<f64> {
    (1..=count).map(|i| i as f64 / denom).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub algo: Algorithm,
    pub deltas: Vec<f64>,
    /// Normalized sparsity axis `k / m`. Mutually exclusive with `rho`.
    pub rho_prime: Option<Vec<f64>>,
    /// Sparsity axis `k / n`.
    pub rho: Option<Vec<f64>>,
    /// Fixed signal length, used unless `n_dynamic` is set.
    pub n: usize,
    /// Explicit `[delta, n]` table.
    pub n_dynamic: Option<Vec<(f64, usize)>>,
    pub trials: usize,
    pub amp: AmpConfig,
    pub tau_grid: Option<Vec<f64>>,
    pub cosamp_max_iters: usize,
    pub success_threshold_db: f64,
    /// Append the analytical l1 transition as an extra column.
    pub curve: bool,
    pub seed: u64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            algo: Algorithm::SAmp,
            deltas: grid(19, 20.0),
            rho_prime: None,
            rho: None,
            n: 500,
            n_dynamic: None,
            trials: 10,
            amp: AmpConfig::default(),
            tau_grid: None,
            cosamp_max_iters: COSAMP_DEFAULT_MAX_ITERS,
            success_threshold_db: DEFAULT_SUCCESS_DB,
            curve: false,
            seed: 0,
        }
    }
}

impl PhaseConfig {
    pub fn resolve(&mut self) -> Result<()> {
        match (&self.rho_prime, &self.rho) {
            (Some(_), Some(_)) => bail!("set either rho_prime or rho, not both"),
            (None, None) => self.rho_prime = Some(grid(19, 20.0)),
            _ => {}
        }
        self.spec()?.validate()?;
        Ok(())
    }

    pub fn spec(&self) -> Result<PhaseGridSpec> {
        let axis = match (&self.rho_prime, &self.rho) {
            (Some(v), None) => RhoAxis::RhoPrime(v.clone()),
            (None, Some(v)) => RhoAxis::Rho(v.clone()),
            _ => bail!("set exactly one of rho_prime and rho"),
        };
        let mut spec = PhaseGridSpec::new(self.algo, self.deltas.clone(), axis);
        spec.n_policy = match &self.n_dynamic {
            Some(table) => NPolicy::Dynamic(table.clone()),
            None => NPolicy::Fixed(self.n),
        };
        spec.trials = self.trials;
        spec.config = self.amp;
        spec.tau_grid = self.tau_grid.clone();
        spec.cosamp_max_iters = self.cosamp_max_iters;
        spec.success_threshold_db = self.success_threshold_db;
        spec.master_seed = self.seed;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    pub deltas: Vec<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { deltas: grid(100, 100.0) }
    }
}

/// A preset given by name or spelled out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PresetRef {
    Name(String),
    Custom(ChannelPreset),
}

impl PresetRef {
    pub fn preset(&self) -> Result<ChannelPreset> {
        Ok(match self {
            PresetRef::Name(name) => ChannelPreset::named(name)?,
            PresetRef::Custom(p) => {
                p.validate()?;
                p.clone()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub preset: PresetRef,
    /// Defaults to doublings from the smallest admissible `m`, plus the largest.
    pub m_values: Option<Vec<usize>>,
    pub algorithms: Vec<Algorithm>,
    pub realizations: usize,
    /// Defaults to the preset SNR.
    pub snr_db: Option<f64>,
    pub decay_rate: f64,
    pub tail_fraction: f64,
    pub amp: AmpConfig,
    pub tau_grid: Option<Vec<f64>>,
    pub cosamp_max_iters: usize,
    pub cosamp_stop_tol: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            preset: PresetRef::Name("32-band-first".into()),
            m_values: None,
            algorithms: vec![Algorithm::SAmp, Algorithm::HAmp, Algorithm::Cosamp, Algorithm::Ls, Algorithm::OptLs],
            realizations: 20,
            snr_db: None,
            decay_rate: DEFAULT_DECAY_RATE,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            amp: AmpConfig::default(),
            tau_grid: None,
            cosamp_max_iters: COSAMP_DEFAULT_MAX_ITERS,
            cosamp_stop_tol: COSAMP_DEFAULT_STOP_TOL,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn resolve(&mut self) -> Result<()> {
        let preset = self.preset.preset()?;
        if self.m_values.is_none() {
            let (lo, hi) = preset.m_range;
            let mut ms: Vec<usize> = std::iter::successors(Some(lo), |m| m.checked_mul(2))
                .take_while(|m| *m <= hi)
                .collect();
            if ms.last() != Some(&hi) {
                ms.push(hi);
            }
            self.m_values = Some(ms);
        }
        let snr = *self.snr_db.get_or_insert(preset.snr_db);
        if !snr.is_finite() {
            bail!("snr_db must be finite, got {snr}");
        }
        self.preset = PresetRef::Custom(preset);
        self.spec()?.validate()?;
        Ok(())
    }

    pub fn spec(&self) -> Result<BenchmarkSpec> {
        let preset = self.preset.preset()?;
        let mut spec = BenchmarkSpec::new(preset, self.m_values.clone().unwrap_or_default(), self.algorithms.clone());
        spec.realizations = self.realizations;
        if let Some(snr) = self.snr_db {
            spec.snr_db = snr;
        }
        spec.master_seed = self.seed;
        spec.decay_rate = self.decay_rate;
        spec.tail_fraction = self.tail_fraction;
        spec.config = self.amp;
        spec.tau_grid = self.tau_grid.clone();
        spec.cosamp_max_iters = self.cosamp_max_iters;
        spec.cosamp_stop_tol = self.cosamp_stop_tol;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverConfig {
    pub algo: Algorithm,
    /// Matrix CSV; without it a matrix of `matrix_kind` is generated.
    pub matrix: Option<PathBuf>,
    /// Measurement CSV (`index,value`); without it one is simulated from the truth.
    pub measurement: Option<PathBuf>,
    /// True signal CSV (`index,value`).
    pub truth: Option<PathBuf>,
    pub matrix_kind: MatrixKind,
    pub m: Option<usize>,
    pub n: Option<usize>,
    /// Sparsity of a generated signal; also the CoSaMP sparsity and the
    /// opt-ls support size when set.
    pub k: Option<usize>,
    /// Noise added to a simulated measurement; `None` is noiseless.
    pub snr_db: Option<f64>,
    /// Fixed AMP threshold; without it `tau` is tuned against the truth.
    pub tau: Option<f64>,
    pub amp: AmpConfig,
    pub tau_grid: Option<Vec<f64>>,
    pub cosamp_max_iters: usize,
    pub cosamp_stop_tol: f64,
    pub seed: u64,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            algo: Algorithm::SAmp,
            matrix: None,
            measurement: None,
            truth: None,
            matrix_kind: MatrixKind::Gaussian,
            m: None,
            n: None,
            k: None,
            snr_db: None,
            tau: None,
            amp: AmpConfig::default(),
            tau_grid: None,
            cosamp_max_iters: COSAMP_DEFAULT_MAX_ITERS,
            cosamp_stop_tol: COSAMP_DEFAULT_STOP_TOL,
            seed: 0,
        }
    }
}

impl RecoverConfig {
    pub fn resolve(&mut self) -> Result<()> {
        if self.matrix.is_none() {
            if self.m.is_none() || self.n.is_none() {
                bail!("recover needs a matrix file or both m and n");
            }
            if self.matrix_kind == MatrixKind::Dense {
                bail!("a dense matrix must be supplied as a file");
            }
        }
        if self.measurement.is_none() && self.truth.is_none() && self.k.is_none() {
            bail!("recover needs a measurement, a truth file or k to generate a signal");
        }
        let is_amp = matches!(self.algo, Algorithm::SAmp | Algorithm::HAmp);
        let has_truth = self.truth.is_some() || self.measurement.is_none();
        if is_amp && self.tau.is_none() && !has_truth {
            bail!("AMP without a truth signal needs a fixed tau");
        }
        if self.algo == Algorithm::OptLs && !has_truth {
            bail!("opt-ls needs the true signal for its support");
        }
        if self.algo == Algorithm::Cosamp && self.k.is_none() && !has_truth {
            bail!("cosamp needs k");
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() || snr == f64::NEG_INFINITY {
                bail!("invalid snr_db {snr}");
            }
        }
        if let Some(tau) = self.tau {
            self.amp.with_tau(tau).validate()?;
        }
        self.amp.validate()?;
        Ok(())
    }
}
