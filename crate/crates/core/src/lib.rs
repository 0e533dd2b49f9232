//! Sparse recovery by approximate message passing (AMP).
//!
//! The crate covers the whole pipeline used to study AMP for sparse channel
//! estimation:
//!
//! - [`geometry`] and [`metrics`]: problem dimensions, NMSE / MSE in dB and
//!   the success criterion.
//! - [`sensing`]: column-normalized i.i.d. Gaussian and Toeplitz-BPSK sensing
//!   matrices with forward/adjoint application.
//! - [`signals`]: strictly sparse vectors, a synthetic approximately-sparse
//!   channel generator and AWGN.
//! - [`amp`]: the AMP iteration with soft or hard thresholding, Onsager
//!   correction and oracle threshold tuning.
//! - [`baselines`]: least squares, oracle least squares and CoSaMP.
//! - [`experiments`]: Monte-Carlo phase-transition and channel benchmark
//!   drivers, and the analytical l1 phase-transition curve.
//! - [`report`]: CSV serialization of results and fixtures.
//!
//! All scalars are real (`f64`). Every random object is a pure function of an
//! explicit 64-bit seed, see [`seed`].

pub mod amp;
pub mod baselines;
mod error;
pub mod experiments;
pub mod geometry;
mod linalg;
pub mod metrics;
pub mod report;
pub mod seed;
pub mod sensing;
pub mod signals;

pub use error::{Error, Result};
pub use geometry::{geometry, ProblemGeometry};
pub use metrics::{RecoveryResult, RecoveryStatus};
