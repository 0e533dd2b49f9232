//! CSV serialization of experiment results.
//!
//! Reals are written in plain decimal with at most 12 significant digits;
//! `-inf` dB becomes the `-300.0` sentinel and NaN an empty field.

use std::io::Write;

use crate::experiments::{dmm_l1_curve, BenchmarkRow, PhaseCellResult};
use crate::metrics::DB_FLOOR;
use crate::signals::ChannelPreset;
use crate::Result;

pub const PHASE_HEADER: [&str; 10] = [
    "delta",
    "rho_prime",
    "n",
    "m",
    "k",
    "trials",
    "successes",
    "success_rate",
    "mean_nmse_db",
    "status",
];
pub const PHASE_CURVE_COLUMN: &str = "rho_prime_critical";
pub const CURVE_HEADER: [&str; 2] = ["delta", "rho_prime_critical"];
pub const CHANNEL_HEADER: [&str; 8] = ["preset", "n", "k", "m", "algorithm", "snr_db", "trials", "mse_db"];

/// Decimal rendering with at most 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == f64::NEG_INFINITY || x < DB_FLOOR {
        return format_number(DB_FLOOR);
    }
    if x == f64::INFINITY {
        return "inf".into();
    }
    if x.abs() < f64::MIN_POSITIVE {
        return "0.0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    let mut s = rounded.to_string();
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

/// Phase-transition table; with `with_curve` an extra column holds the
/// analytical l1 transition at each delta (empty for delta > 1).
pub fn write_phase_csv<W: Write>(cells: &[PhaseCellResult], with_curve: bool, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = PHASE_HEADER.to_vec();
    if with_curve {
        header.push(PHASE_CURVE_COLUMN);
    }
    w.write_record(&header)?;
    for c in cells {
        let mut rec = vec![
            format_number(c.delta),
            format_number(c.rho_prime),
            c.n.to_string(),
            c.m.to_string(),
            c.k.to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            format_number(c.success_rate),
            format_number(c.mean_nmse_db),
            c.status.as_str().to_string(),
        ];
        if with_curve {
            rec.push(dmm_l1_curve(c.delta).map(format_number).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per delta; out-of-range deltas get the value `error`.
pub fn write_curve_csv<W: Write>(deltas: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CURVE_HEADER)?;
    for &d in deltas {
        let value = match dmm_l1_curve(d) {
            Ok(v) => format_number(v),
            Err(_) => "error".to_string(),
        };
        w.write_record([format_number(d), value])?;
    }
    w.flush()?;
    Ok(())
}

/// Channel benchmark table; skipped rows have zero trials and an empty MSE.
pub fn write_channel_csv<W: Write>(
    preset: &ChannelPreset,
    snr_db: f64,
    rows: &[BenchmarkRow],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CHANNEL_HEADER)?;
    for r in rows {
        w.write_record([
            preset.name.clone(),
            preset.n.to_string(),
            preset.k.to_string(),
            r.m.to_string(),
            r.algorithm.to_string(),
            format_number(snr_db),
            r.trials.to_string(),
            format_number(r.mse_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}
