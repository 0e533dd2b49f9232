//! Test signals: strictly sparse vectors, a synthetic approximately-sparse
//! channel impulse response, and additive white Gaussian noise.

use std::io::{Read, Write};

use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::metrics::sq_norm;
use crate::seed;
use crate::{Error, Result};

/// Default per-tap magnitude decay of the synthetic channel.
pub const DEFAULT_DECAY_RATE: f64 = 0.7;
/// Default share of channel energy outside the dominant taps.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.01;

/// A length-`n` vector together with its (dominant) support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    /// Sorted indices of the nonzero, or for approximately sparse signals
    /// the dominant, entries.
    pub support: Vec<usize>,
    pub k: usize,
}

impl SparseSignal {
    /// Wraps a vector, taking its nonzero entries as the support.
    pub fn from_values(values: Vec<f64>) -> Self {
        let support: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        let k = support.len();
        SparseSignal { values, support, k }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Energy outside the support divided by the total energy.
    pub fn off_support_energy_fraction(&self) -> f64 {
        let total = sq_norm(&self.values);
        if total == 0.0 {
            return 0.0;
        }
        let on: f64 = self.support.iter().map(|&i| self.values[i] * self.values[i]).sum();
        ((total - on) / total).max(0.0)
    }
}

/// Subband configuration of the channel benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPreset {
    /// Preset name used in CSV output.
    pub name: String,
    /// Number of subbands the band is split into; `None` for user presets.
    pub subbands: Option<u32>,
    /// Which subband is used.
    pub used_subband: String,
    /// Channel length in taps.
    pub n: usize,
    /// Number of dominant taps.
    pub k: usize,
    /// Admissible training lengths, inclusive.
    pub m_range: (usize, usize),
    /// Default measurement SNR in dB.
    pub snr_db: f64,
}

/// Default benchmark SNR in dB.
pub const DEFAULT_SNR_DB: f64 = 20.0;

impl ChannelPreset {
    /// First of 32 subbands.
    pub fn band32_first() -> Self {
        ChannelPreset {
            name: "32-band-first".into(),
            subbands: Some(32),
            used_subband: "first".into(),
            n: 1585,
            k: 9,
            m_range: (100, 3000),
            snr_db: DEFAULT_SNR_DB,
        }
    }

    /// Third of 16 subbands.
    pub fn band16_third() -> Self {
        ChannelPreset {
            name: "16-band-third".into(),
            subbands: Some(16),
            used_subband: "third".into(),
            n: 3223,
            k: 9,
            m_range: (100, 5000),
            snr_db: DEFAULT_SNR_DB,
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "32-band-first" => Ok(Self::band32_first()),
            "16-band-third" => Ok(Self::band16_third()),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset '{other}' (expected 32-band-first or 16-band-third)"
            ))),
        }
    }

    /// A user-defined preset.
    pub fn custom(n: usize, k: usize, m_range: (usize, usize), snr_db: f64) -> Result<Self> {
        let p = ChannelPreset {
            name: "custom".into(),
            subbands: None,
            used_subband: "custom".into(),
            n,
            k,
            m_range,
            snr_db,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::InvalidArgument(format!(
                "preset needs n >= k >= 1, got n={} k={}",
                self.n, self.k
            )));
        }
        if self.m_range.0 == 0 || self.m_range.0 > self.m_range.1 {
            return Err(Error::InvalidArgument(format!("invalid m range {:?}", self.m_range)));
        }
        Ok(())
    }
}

fn nonzero_normal(rng: &mut seed::Rng) -> f64 {
    loop {
        let v: f64 = rng.sample(StandardNormal);
        if v != 0.0 {
            return v;
        }
    }
}

/// Length-`n` vector with `k` standard-normal nonzeros on a uniformly random
/// support.
pub fn strictly_sparse(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    if k > n {
        return Err(Error::InvalidArgument(format!("sparsity k={k} exceeds n={n}")));
    }
    let mut rng = seed::rng(seed);
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut values = vec![0.0; n];
    for &i in &support {
        values[i] = nonzero_normal(&mut rng);
    }
    Ok(SparseSignal { values, support, k })
}

/// Synthetic approximately-sparse channel.
///
/// `preset.k` dominant taps sit at random delays; in delay order their
/// magnitudes are `1, decay, decay^2, ...` with random signs. All other taps
/// carry i.i.d. Gaussian noise scaled so that they hold exactly
/// `tail_fraction` of the total energy. The result has unit energy.
/// `tail_fraction = 0` yields a strictly sparse channel.
pub fn thz_like_channel(
    preset: &ChannelPreset,
    decay_rate: f64,
    tail_fraction: f64,
    seed: u64,
) -> Result<SparseSignal> {
    preset.validate()?;
    if !(decay_rate > 0.0 && decay_rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("decay rate {decay_rate} not in (0, 1]")));
    }
    if !(0.0..1.0).contains(&tail_fraction) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction {tail_fraction} not in [0, 1)"
        )));
    }
    let (n, k) = (preset.n, preset.k);
    if tail_fraction > 0.0 && k == n {
        return Err(Error::InvalidArgument("no taps left for the tail".into()));
    }
    let mut rng = seed::rng(seed);
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();

    let mut values = vec![0.0; n];
    let mut magnitude = 1.0;
    for &i in &support {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        values[i] = sign * magnitude;
        magnitude *= decay_rate;
    }
    let on_energy = sq_norm(&values);

    if tail_fraction > 0.0 {
        let mut in_support = vec![false; n];
        support.iter().for_each(|&i| in_support[i] = true);
        let tail_idx: Vec<usize> = (0..n).filter(|&i| !in_support[i]).collect();
        let tail: Vec<f64> = tail_idx.iter().map(|_| nonzero_normal(&mut rng)).collect();
        let target = on_energy * tail_fraction / (1.0 - tail_fraction);
        let scale = (target / sq_norm(&tail)).sqrt();
        for (&i, t) in tail_idx.iter().zip(&tail) {
            values[i] = t * scale;
        }
    }

    let norm = sq_norm(&values).sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(SparseSignal { values, support, k })
}

/// Adds white Gaussian noise with variance `||y||^2 / (m 10^(snr/10))`.
///
/// `snr_db = +inf` returns the clean vector and zero variance. Returns the
/// noisy vector and the noise variance.
pub fn add_noise(y_clean: &[f64], snr_db: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!("invalid SNR {snr_db} dB")));
    }
    if snr_db == f64::INFINITY || y_clean.is_empty() {
        return Ok((y_clean.to_vec(), 0.0));
    }
    let variance = sq_norm(y_clean) / (y_clean.len() as f64 * 10f64.powf(snr_db / 10.0));
    let std = variance.sqrt();
    let mut rng = seed::rng(seed);
    let y = y_clean
        .iter()
        .map(|v| v + std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok((y, variance))
}

/// Writes a vector as `index,value` CSV.
pub fn write_vector_csv<W: Write>(values: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `index,value` CSV. Indices must be `0, 1, 2, ...` in order.
pub fn read_vector_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut values = Vec::new();
    for (expected, rec) in r.records().enumerate() {
        let rec = rec?;
        let idx: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad index on row {}", expected + 1)))?;
        if idx != expected {
            return Err(Error::Parse(format!("expected index {expected}, found {idx}")));
        }
        let v: f64 = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad value on row {}", expected + 1)))?;
        values.push(v);
    }
    Ok(values)
}
