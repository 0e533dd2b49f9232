//! Monte-Carlo experiment drivers.
//!
//! Trials are distributed over the current rayon thread pool. Each trial
//! derives its seed from `(master_seed, cell index, trial index)` and results
//! are aggregated in index order, so tables are identical for any number of
//! worker threads.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

mod channel;
mod curve;
mod phase;

pub use channel::{channel_benchmark, BenchmarkRow, BenchmarkSpec};
pub use curve::{dmm_l1_curve, l1_transition_objective};
pub use phase::{
    empirical_boundary, phase_transition, CellStatus, NPolicy, PhaseCellResult, PhaseGridSpec,
    RhoAxis,
};

/// Recovery scheme selectable in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// AMP with soft thresholding.
    #[serde(rename = "s-amp")]
    SAmp,
    /// AMP with hard thresholding.
    #[serde(rename = "h-amp")]
    HAmp,
    #[serde(rename = "cosamp")]
    Cosamp,
    /// Minimum-norm least squares.
    #[serde(rename = "ls")]
    Ls,
    /// Least squares on the true (dominant) support.
    #[serde(rename = "opt-ls")]
    OptLs,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::SAmp => "s-amp",
            Algorithm::HAmp => "h-amp",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Ls => "ls",
            Algorithm::OptLs => "opt-ls",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "s-amp" => Ok(Algorithm::SAmp),
            "h-amp" => Ok(Algorithm::HAmp),
            "cosamp" => Ok(Algorithm::Cosamp),
            "ls" => Ok(Algorithm::Ls),
            "opt-ls" => Ok(Algorithm::OptLs),
            other => Err(Error::Parse(format!("unknown algorithm '{other}'"))),
        }
    }
}
