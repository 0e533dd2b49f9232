//! Sensing matrices with unit-norm columns.
//!
//! Two ensembles are provided: i.i.d. Gaussian and the linear-convolution
//! (Toeplitz) matrix of a random BPSK training sequence. Entries are stored
//! densely in column-major order after column normalization. Toeplitz
//! matrices additionally carry an FFT plan so that forward and adjoint
//! products cost `O((m + n) log(m + n))` instead of `O(mn)`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::check_len;
use crate::linalg::{axpy, dot};
use crate::seed;
use crate::{Error, Result};

/// Ensemble a sensing matrix was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Gaussian,
    ToeplitzBpsk,
    /// User supplied entries (test fixtures, matrices loaded from disk).
    Dense,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Gaussian => "gaussian",
            MatrixKind::ToeplitzBpsk => "toeplitz-bpsk",
            MatrixKind::Dense => "dense",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(MatrixKind::Gaussian),
            "toeplitz-bpsk" => Ok(MatrixKind::ToeplitzBpsk),
            "dense" => Ok(MatrixKind::Dense),
            other => Err(Error::Parse(format!("unknown matrix kind '{other}'"))),
        }
    }
}

/// Precomputed spectrum of the training sequence for FFT-based products.
#[derive(Clone)]
struct ConvolutionPlan {
    len: usize,
    spectrum: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Applied after the inverse transform: `1 / (len * column_norm)`.
    scale: f64,
}

impl ConvolutionPlan {
    fn new(training: &[f64], column_norm: f64) -> Self {
        let len = training.len().next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut spectrum: Vec<Complex<f64>> = training
            .iter()
            .map(|&s| Complex::new(s, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(len)
            .collect();
        fft.process(&mut spectrum);
        ConvolutionPlan {
            len,
            spectrum,
            fft,
            ifft,
            scale: 1.0 / (len as f64 * column_norm),
        }
    }

    /// Rough flop count of one product, used to choose between paths.
    fn cost(&self) -> usize {
        let log = self.len.trailing_zeros().max(1) as usize;
        10 * self.len * log
    }

    fn forward(&self, x: &[f64], rows: usize, out: &mut [f64]) {
        let n = x.len();
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.fft.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.ifft.process(&mut buf);
        for (i, o) in out.iter_mut().enumerate().take(rows) {
            *o = buf[i + n - 1].re * self.scale;
        }
    }

    fn adjoint(&self, z: &[f64], cols: usize, out: &mut [f64]) {
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(z) {
            b.re = v;
        }
        self.fft.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b = s * b.conj();
        }
        self.ifft.process(&mut buf);
        // buf[p] = sum_i s[i + p] z[i]; column j uses lag p = n - 1 - j.
        for (j, o) in out.iter_mut().enumerate().take(cols) {
            *o = buf[cols - 1 - j].re * self.scale;
        }
    }
}

/// An `m x n` real sensing matrix with unit-l2-norm columns.
#[derive(Clone)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    kind: MatrixKind,
    seed: Option<u64>,
    /// Column-major, normalized.
    entries: Vec<f64>,
    column_norms: Vec<f64>,
    training: Option<Vec<f64>>,
    plan: Option<ConvolutionPlan>,
}

impl fmt::Debug for SensingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensingMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("kind", &self.kind)
            .field("seed", &self.seed)
            .field("fast_path", &self.plan.is_some())
            .finish_non_exhaustive()
    }
}

fn check_size(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidGeometry(format!(
            "sensing matrix needs m >= 1 and n >= 1, got {m} x {n}"
        )));
    }
    Ok(())
}

fn column_norm(col: &[f64]) -> f64 {
    dot(col, col).sqrt()
}

/// Draws an `m x n` matrix with i.i.d. standard normal entries and scales each
/// column to unit norm.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    check_size(m, n)?;
    let mut rng = seed::rng(seed);
    let mut entries = vec![0.0; m * n];
    let mut column_norms = Vec::with_capacity(n);
    for col in entries.chunks_exact_mut(m) {
        let norm = loop {
            for v in col.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let norm = column_norm(col);
            if norm > 0.0 {
                break norm;
            }
        };
        col.iter_mut().for_each(|v| *v /= norm);
        column_norms.push(norm);
    }
    Ok(SensingMatrix {
        rows: m,
        cols: n,
        kind: MatrixKind::Gaussian,
        seed: Some(seed),
        entries,
        column_norms,
        training: None,
        plan: None,
    })
}

/// Linear-convolution matrix of a uniform random `+-1` sequence of length
/// `m + n - 1`, column normalized.
pub fn toeplitz_bpsk_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    check_size(m, n)?;
    let mut rng = seed::rng(seed);
    let training: Vec<f64> = (0..m + n - 1)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut a = toeplitz_from_sequence(m, n, &training)?;
    a.seed = Some(seed);
    Ok(a)
}

/// Convolution matrix of a given BPSK sequence `s` of length `m + n - 1`:
/// before normalization, entry `(i, j)` is `s[i - j + n - 1]`.
pub fn toeplitz_from_sequence(m: usize, n: usize, training: &[f64]) -> Result<SensingMatrix> {
    check_size(m, n)?;
    check_len(m + n - 1, training.len())?;
    if training.iter().any(|&s| s != 1.0 && s != -1.0) {
        return Err(Error::InvalidArgument("training symbols must be +1 or -1".into()));
    }
    let norm = (m as f64).sqrt();
    let mut entries = vec![0.0; m * n];
    for (j, col) in entries.chunks_exact_mut(m).enumerate() {
        for (i, v) in col.iter_mut().enumerate() {
            *v = training[i + n - 1 - j] / norm;
        }
    }
    Ok(SensingMatrix {
        rows: m,
        cols: n,
        kind: MatrixKind::ToeplitzBpsk,
        seed: None,
        entries,
        column_norms: vec![norm; n],
        plan: Some(ConvolutionPlan::new(training, norm)),
        training: Some(training.to_vec()),
    })
}

impl SensingMatrix {
    /// Builds a matrix from row-major entries, normalizing every column.
    /// Zero columns are rejected.
    pub fn from_row_major(m: usize, n: usize, data: &[f64]) -> Result<Self> {
        check_size(m, n)?;
        check_len(m * n, data.len())?;
        let mut entries = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                entries[j * m + i] = data[i * n + j];
            }
        }
        let mut column_norms = Vec::with_capacity(n);
        for (j, col) in entries.chunks_exact_mut(m).enumerate() {
            let norm = column_norm(col);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidArgument(format!("column {j} has zero or non-finite norm")));
            }
            col.iter_mut().for_each(|v| *v /= norm);
            column_norms.push(norm);
        }
        Ok(SensingMatrix {
            rows: m,
            cols: n,
            kind: MatrixKind::Dense,
            seed: None,
            entries,
            column_norms,
            training: None,
            plan: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Indeterminacy `m / n`.
    pub fn delta(&self) -> f64 {
        self.rows as f64 / self.cols as f64
    }

    /// Normalized entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.entries[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_norms_pre_normalization(&self) -> &[f64] {
        &self.column_norms
    }

    /// BPSK training sequence of a Toeplitz matrix.
    pub fn training_sequence(&self) -> Option<&[f64]> {
        self.training.as_deref()
    }

    pub fn has_fast_path(&self) -> bool {
        self.plan.is_some()
    }

    /// `A x`
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.forward_into(x, &mut out);
        Ok(out)
    }

    /// `A^T z`
    pub fn adjoint(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, z.len())?;
        let mut out = vec![0.0; self.cols];
        self.adjoint_into(z, &mut out);
        Ok(out)
    }

    /// `A x` by explicit dense multiplication.
    pub fn forward_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.forward_dense_into(x, &mut out);
        Ok(out)
    }

    /// `A^T z` by explicit dense multiplication.
    pub fn adjoint_dense(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, z.len())?;
        let mut out = vec![0.0; self.cols];
        self.adjoint_dense_into(z, &mut out);
        Ok(out)
    }

    /// `A x` through the FFT convolution; only Toeplitz matrices have one.
    pub fn forward_fft(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let plan = self.plan.as_ref().ok_or_else(no_fast_path)?;
        let mut out = vec![0.0; self.rows];
        plan.forward(x, self.rows, &mut out);
        Ok(out)
    }

    /// `A^T z` through the FFT correlation; only Toeplitz matrices have one.
    pub fn adjoint_fft(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, z.len())?;
        let plan = self.plan.as_ref().ok_or_else(no_fast_path)?;
        let mut out = vec![0.0; self.cols];
        plan.adjoint(z, self.cols, &mut out);
        Ok(out)
    }

    /// Unchecked `A x` into `out`, picking the cheaper of the sparse-aware
    /// dense product and the FFT path.
    pub(crate) fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        if let Some(plan) = &self.plan {
            let nnz = x.iter().filter(|v| **v != 0.0).count();
            if nnz * self.rows > plan.cost() {
                plan.forward(x, self.rows, out);
                return;
            }
        }
        self.forward_dense_into(x, out);
    }

    pub(crate) fn adjoint_into(&self, z: &[f64], out: &mut [f64]) {
        if let Some(plan) = &self.plan {
            if self.rows * self.cols > plan.cost() {
                plan.adjoint(z, self.cols, out);
                return;
            }
        }
        self.adjoint_dense_into(z, out);
    }

    fn forward_dense_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), out);
            }
        }
    }

    fn adjoint_dense_into(&self, z: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(j), z);
        }
    }

    /// Writes the matrix as CSV: a header record `m,n,kind,seed`, one record
    /// with those values (empty seed when unknown), then `m` row-major
    /// records of normalized entries.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["m", "n", "kind", "seed"])?;
        w.write_record([
            self.rows.to_string(),
            self.cols.to_string(),
            self.kind.to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
        for i in 0..self.rows {
            w.write_record((0..self.cols).map(|j| self.get(i, j).to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a matrix written by [`SensingMatrix::write_csv`]. Columns are
    /// renormalized on load; Toeplitz matrices regain their FFT path from
    /// the recovered training sequence.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let mut records = r.records();
        let meta = records
            .next()
            .ok_or_else(|| Error::Parse("matrix file has no metadata record".into()))??;
        let field = |i: usize| meta.get(i).unwrap_or("").trim().to_string();
        let m: usize = field(0).parse().map_err(|_| Error::Parse("bad m".into()))?;
        let n: usize = field(1).parse().map_err(|_| Error::Parse("bad n".into()))?;
        let kind: MatrixKind = field(2).parse()?;
        let seed = match field(3).as_str() {
            "" => None,
            s => Some(s.parse::<u64>().map_err(|_| Error::Parse("bad seed".into()))?),
        };
        let mut data = Vec::with_capacity(m * n);
        for rec in records {
            let rec = rec?;
            check_len(n, rec.len())?;
            for v in rec.iter() {
                data.push(v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad entry '{v}'")))?);
            }
        }
        let mut a = if kind == MatrixKind::ToeplitzBpsk {
            check_len(m * n, data.len())?;
            // s[i - j + n - 1] = sign of entry (i, j): first row then first column.
            let mut training = vec![0.0; m + n - 1];
            for j in 0..n {
                training[n - 1 - j] = data[j].signum();
            }
            for i in 0..m {
                training[i + n - 1] = data[i * n].signum();
            }
            toeplitz_from_sequence(m, n, &training)?
        } else {
            let mut a = SensingMatrix::from_row_major(m, n, &data)?;
            a.kind = kind;
            a
        };
        a.seed = seed;
        Ok(a)
    }
}

fn no_fast_path() -> Error {
    Error::InvalidArgument("matrix has no FFT fast path".into())
}
