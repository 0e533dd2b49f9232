//! Empirical phase transitions over a `(delta, rho')` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Algorithm;
use crate::amp::{default_tau_grid, tune_tau_oracle, AmpConfig, ThresholdKind};
use crate::baselines::{cosamp, COSAMP_DEFAULT_MAX_ITERS, COSAMP_DEFAULT_STOP_TOL};
use crate::metrics::{clamp_db, nmse_db, success, DEFAULT_SUCCESS_DB};
use crate::seed::{derive, trial_seed};
use crate::sensing::gaussian_matrix;
use crate::signals::strictly_sparse;
use crate::{Error, Result};

/// Sparsity axis of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoAxis {
    /// Normalized sparsity `k / m`; `k = max(1, round(rho' m))`.
    RhoPrime(Vec<f64>),
    /// Sparsity factor `k / n`; `k = max(1, round(rho n))`.
    Rho(Vec<f64>),
}

impl RhoAxis {
    fn values(&self) -> &[f64] {
        match self {
            RhoAxis::RhoPrime(v) | RhoAxis::Rho(v) => v,
        }
    }
}

/// How the signal length is chosen per `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NPolicy {
    Fixed(usize),
    /// Explicit `(delta, n)` table.
    Dynamic(Vec<(f64, usize)>),
}

impl NPolicy {
    /// Table running geometrically from `n_at_min` at the smallest delta to
    /// `n_at_max` at the largest.
    pub fn geometric(deltas: &[f64], n_at_min: usize, n_at_max: usize) -> Self {
        let lo = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let table = deltas
            .iter()
            .map(|&d| {
                let t = if hi > lo { (d - lo) / (hi - lo) } else { 0.0 };
                let n = n_at_min as f64 * (n_at_max as f64 / n_at_min as f64).powf(t);
                (d, n.round() as usize)
            })
            .collect();
        NPolicy::Dynamic(table)
    }

    fn n_for(&self, delta: f64) -> Option<usize> {
        match self {
            NPolicy::Fixed(n) => Some(*n),
            NPolicy::Dynamic(table) => table
                .iter()
                .find(|(d, _)| (d - delta).abs() <= 1e-12 * delta.abs().max(1.0))
                .map(|(_, n)| *n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridSpec {
    pub delta_values: Vec<f64>,
    pub rho_axis: RhoAxis,
    pub n_policy: NPolicy,
    pub trials: usize,
    pub algo: Algorithm,
    /// AMP settings; the threshold kind follows `algo` and `tau` is tuned.
    pub config: AmpConfig,
    /// Oracle `tau` grid; `None` uses the default grid of each threshold kind.
    #[serde(default)]
    pub tau_grid: Option<Vec<f64>>,
    pub cosamp_max_iters: usize,
    pub success_threshold_db: f64,
    pub master_seed: u64,
}

impl PhaseGridSpec {
    /// Desk-scale defaults: `n = 500`, 10 trials, grid step 0.05.
    pub fn new(algo: Algorithm, delta_values: Vec<f64>, rho_axis: RhoAxis) -> Self {
        PhaseGridSpec {
            delta_values,
            rho_axis,
            n_policy: NPolicy::Fixed(500),
            trials: 10,
            algo,
            config: AmpConfig::default(),
            tau_grid: None,
            cosamp_max_iters: COSAMP_DEFAULT_MAX_ITERS,
            success_threshold_db: DEFAULT_SUCCESS_DB,
            master_seed: 0,
        }
    }

    /// The grid searched for threshold kind `kind`.
    pub fn tau_grid_for(&self, kind: ThresholdKind) -> Vec<f64> {
        self.tau_grid.clone().unwrap_or_else(|| default_tau_grid(kind))
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_values.is_empty() || self.rho_axis.values().is_empty() {
            return Err(Error::InvalidArgument("phase grid has no cells".into()));
        }
        if let Some(d) = self.delta_values.iter().find(|d| !(**d > 0.0 && **d <= 2.0)) {
            return Err(Error::InvalidArgument(format!("delta {d} not in (0, 2]")));
        }
        if let Some(r) = self.rho_axis.values().iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("sparsity value {r} is invalid")));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if let Some(d) = self.delta_values.iter().find(|d| self.n_policy.n_for(**d).is_none()) {
            return Err(Error::InvalidArgument(format!("dynamic n table has no entry for delta {d}")));
        }
        if matches!(self.n_policy, NPolicy::Fixed(0)) {
            return Err(Error::InvalidArgument("fixed n must be >= 1".into()));
        }
        if matches!(self.algo, Algorithm::Ls | Algorithm::OptLs) {
            return Err(Error::InvalidArgument(format!(
                "phase transitions support s-amp, h-amp and cosamp, not {}",
                self.algo
            )));
        }
        if matches!(self.algo, Algorithm::SAmp | Algorithm::HAmp) {
            if self.tau_grid.as_ref().is_some_and(|g| g.is_empty()) {
                return Err(Error::InvalidArgument("tau grid is empty".into()));
            }
            self.config.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Skipped,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCellResult {
    pub delta: f64,
    /// Grid value on a `rho'` axis, `k / m` on a `rho` axis.
    pub rho_prime: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub successes: usize,
    pub trials: usize,
    pub success_rate: f64,
    /// Mean over trials of the NMSE in dB, each clamped at the -300 dB
    /// floor. NaN for skipped cells.
    pub mean_nmse_db: f64,
    pub status: CellStatus,
}

struct Cell {
    delta: f64,
    rho_prime: f64,
    n: usize,
    m: usize,
    k: usize,
    feasible: bool,
}

fn layout(spec: &PhaseGridSpec) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &delta in &spec.delta_values {
        let n = spec.n_policy.n_for(delta).unwrap_or(0);
        let m = (delta * n as f64).round() as usize;
        for &r in spec.rho_axis.values() {
            let (k, rho_prime) = match spec.rho_axis {
                RhoAxis::RhoPrime(_) => (((r * m as f64).round() as usize).max(1), r),
                RhoAxis::Rho(_) => {
                    let k = ((r * n as f64).round() as usize).max(1);
                    (k, if m > 0 { k as f64 / m as f64 } else { f64::NAN })
                }
            };
            cells.push(Cell { delta, rho_prime, n, m, k, feasible: n >= 1 && m >= 1 && k <= n });
        }
    }
    cells
}

fn run_trial(spec: &PhaseGridSpec, cell: &Cell, seed: u64) -> Result<f64> {
    let a = gaussian_matrix(cell.m, cell.n, derive(seed, 0))?;
    let h = strictly_sparse(cell.n, cell.k, derive(seed, 1))?;
    let y = a.forward(&h.values)?;
    let estimate = match spec.algo {
        Algorithm::SAmp | Algorithm::HAmp => {
            let mut config = spec.config;
            config.thresholder.kind = if spec.algo == Algorithm::SAmp {
                ThresholdKind::Soft
            } else {
                ThresholdKind::Hard
            };
            tune_tau_oracle(&a, &y, &h.values, &spec.tau_grid_for(config.thresholder.kind), &config)?.result.estimate
        }
        Algorithm::Cosamp => {
            cosamp(&a, &y, cell.k, spec.cosamp_max_iters, COSAMP_DEFAULT_STOP_TOL)?.estimate
        }
        Algorithm::Ls | Algorithm::OptLs => unreachable!("rejected by validate"),
    };
    nmse_db(&estimate, &h.values)
}

/// Runs every `(cell, trial)` of the grid. Cells are ordered delta-major in
/// the order given by the spec.
pub fn phase_transition(spec: &PhaseGridSpec) -> Result<Vec<PhaseCellResult>> {
    spec.validate()?;
    let cells = layout(spec);
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .flat_map(|(i, _)| (0..spec.trials).map(move |t| (i, t)))
        .collect();

    let outcomes: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, t)| run_trial(spec, &cells[i], trial_seed(spec.master_seed, i as u64, t as u64)))
        .collect::<Result<_>>()?;

    let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); cells.len()];
    for (&(i, _), db) in jobs.iter().zip(outcomes) {
        per_cell[i].push(db);
    }

    Ok(cells
        .iter()
        .zip(per_cell)
        .map(|(c, dbs)| {
            if !c.feasible {
                return PhaseCellResult {
                    delta: c.delta,
                    rho_prime: c.rho_prime,
                    n: c.n,
                    m: c.m,
                    k: c.k,
                    successes: 0,
                    trials: 0,
                    success_rate: 0.0,
                    mean_nmse_db: f64::NAN,
                    status: CellStatus::Skipped,
                };
            }
            let successes = dbs.iter().filter(|d| success(**d, spec.success_threshold_db)).count();
            let mean = dbs.iter().map(|d| clamp_db(*d)).sum::<f64>() / dbs.len() as f64;
            PhaseCellResult {
                delta: c.delta,
                rho_prime: c.rho_prime,
                n: c.n,
                m: c.m,
                k: c.k,
                successes,
                trials: dbs.len(),
                success_rate: successes as f64 / dbs.len() as f64,
                mean_nmse_db: mean,
                status: CellStatus::Ok,
            }
        })
        .collect())
}

/// 50%-success boundary in `rho'` along one column of cells.
///
/// Takes the cells with the given `delta`, sorted by `rho'`, and linearly
/// interpolates the first crossing of a 0.5 success rate. If the rate never
/// drops below 0.5 the largest `rho'` is returned; if it starts below 0.5,
/// the smallest.
pub fn empirical_boundary(cells: &[PhaseCellResult], delta: f64) -> Option<f64> {
    let mut column: Vec<&PhaseCellResult> = cells
        .iter()
        .filter(|c| c.status == CellStatus::Ok && (c.delta - delta).abs() < 1e-12)
        .collect();
    column.sort_by(|a, b| a.rho_prime.total_cmp(&b.rho_prime));
    let first = column.first()?;
    if first.success_rate < 0.5 {
        return Some(first.rho_prime);
    }
    for w in column.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.success_rate < 0.5 {
            let t = (a.success_rate - 0.5) / (a.success_rate - b.success_rate);
            return Some(a.rho_prime + t * (b.rho_prime - a.rho_prime));
        }
    }
    column.last().map(|c| c.rho_prime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(rho_prime: f64, rate: f64) -> PhaseCellResult {
        PhaseCellResult {
            delta: 0.5,
            rho_prime,
            n: 10,
            m: 5,
            k: 1,
            successes: 0,
            trials: 10,
            success_rate: rate,
            mean_nmse_db: 0.0,
            status: CellStatus::Ok,
        }
    }

    #[test]
    fn boundary_interpolates() {
        let cells = vec![cell(0.1, 1.0), cell(0.2, 0.8), cell(0.3, 0.2), cell(0.4, 0.0)];
        let b = empirical_boundary(&cells, 0.5).unwrap();
        assert!((b - 0.25).abs() < 1e-12);
        assert_eq!(empirical_boundary(&cells[..2], 0.5), Some(0.2));
        assert_eq!(empirical_boundary(&cells[2..], 0.5), Some(0.3));
        assert_eq!(empirical_boundary(&cells, 0.9), None);
    }

    #[test]
    fn geometric_table() {
        let NPolicy::Dynamic(t) = NPolicy::geometric(&[0.002, 0.1085, 0.215], 20000, 2000) else {
            panic!()
        };
        assert_eq!(t[0].1, 20000);
        assert_eq!(t[2].1, 2000);
        assert_eq!(t[1].1, 6325);
    }

    #[test]
    fn validation() {
        let spec = PhaseGridSpec::new(Algorithm::SAmp, vec![0.5], RhoAxis::RhoPrime(vec![0.1]));
        assert!(spec.validate().is_ok());
        let mut bad = spec.clone();
        bad.delta_values = vec![2.5];
        assert!(bad.validate().is_err());
        let mut bad = spec.clone();
        bad.trials = 0;
        assert!(bad.validate().is_err());
        let mut bad = spec.clone();
        bad.n_policy = NPolicy::Dynamic(vec![(0.4, 100)]);
        assert!(bad.validate().is_err());
        let mut bad = spec;
        bad.algo = Algorithm::Ls;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn infeasible_cells_are_skipped() {
        let mut spec = PhaseGridSpec::new(Algorithm::Cosamp, vec![0.001, 0.5], RhoAxis::Rho(vec![0.1, 2.0]));
        spec.n_policy = NPolicy::Fixed(40);
        spec.trials = 2;
        let cells = phase_transition(&spec).unwrap();
        assert_eq!(cells.len(), 4);
        // m = round(0.04) = 0 for delta = 0.001; k = 80 > n for rho = 2.
        assert_eq!(cells[0].status, CellStatus::Skipped);
        assert_eq!(cells[1].status, CellStatus::Skipped);
        assert_eq!(cells[2].status, CellStatus::Ok);
        assert_eq!(cells[2].trials, 2);
        assert_eq!(cells[3].status, CellStatus::Skipped);
    }
}
