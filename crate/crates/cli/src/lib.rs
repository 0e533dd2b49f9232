//! Command-line front end for the `ampcs` experiments.
//!
//! Each command resolves its configuration (JSON file, then flags), runs on a
//! rayon pool of `--workers` threads and writes its result file together with
//! `<out>.manifest.json`. Nothing is written unless the run succeeds.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use ampcs::amp::{amp_run, default_tau_grid, tune_tau_oracle, ThresholdKind};
use ampcs::baselines::{cosamp, least_squares, oracle_ls, top_indices};
use ampcs::experiments::{channel_benchmark, phase_transition, Algorithm};
use ampcs::metrics::{clamp_db, nmse_db};
use ampcs::report::{write_channel_csv, write_curve_csv, write_phase_csv};
use ampcs::sensing::{gaussian_matrix, toeplitz_bpsk_matrix, MatrixKind, SensingMatrix};
use ampcs::signals::{add_noise, read_vector_csv, strictly_sparse, write_vector_csv};
use ampcs::RecoveryStatus;
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub mod config;

use config::{ChannelConfig, CurveConfig, PhaseConfig, PresetRef, RecoverConfig};

pub const TOOL: &str = "ampcs";

#[derive(Debug, Parser)]
#[command(name = "ampcs", version, about = "Sparse recovery experiments with approximate message passing")]
pub struct Cli {
    /// JSON config file, or a manifest from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Output file; the manifest goes to `<out>.manifest.json`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover one signal and write the estimate as `index,value` CSV.
    Recover(RecoverArgs),
    /// Empirical phase transition over a (delta, rho') grid.
    Phase(PhaseArgs),
    /// Analytical l1 phase-transition curve.
    Curve(CurveArgs),
    /// Channel-estimation benchmark.
    Channel(ChannelArgs),
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    measurement: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    truth: Option<PathBuf>,
    #[arg(long)]
    matrix_kind: Option<MatrixKind>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "rho")]
    rho_prime: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    /// Signal lengths at the smallest and largest delta, interpolated
    /// geometrically in between.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "N_MIN_DELTA,N_MAX_DELTA")]
    n_dynamic: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    threshold_db: Option<f64>,
    /// Add the analytical curve column.
    #[arg(long)]
    curve: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// `32-band-first` or `16-band-third`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

/// Run manifest written next to every result file.
#[derive(Debug, Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a T,
}

/// Loads a command config from a plain config file or from a manifest.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, command: &str) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let is_manifest = value.get("tool").and_then(Value::as_str) == Some(TOOL) && value.get("config").is_some();
    if is_manifest {
        let recorded = value.get("command").and_then(Value::as_str).unwrap_or("");
        if recorded != command {
            bail!("manifest {} is for '{recorded}', not '{command}'", path.display());
        }
        value = value["config"].take();
    }
    serde_json::from_value(value).with_context(|| format!("invalid {command} config in {}", path.display()))
}

fn pool(workers: Option<u64>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w as usize);
    }
    Ok(builder.build()?)
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_outputs<T: Serialize>(
    out: &Path,
    command: &str,
    seed: u64,
    config: &T,
    body: &[u8],
    extra: Option<(&str, Vec<u8>)>,
) -> Result<()> {
    let manifest = Manifest { tool: TOOL, version: env!("CARGO_PKG_VERSION"), command, seed, config };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    fs::write(out, body).with_context(|| format!("writing {}", out.display()))?;
    if let Some((suffix, bytes)) = extra {
        fs::write(sidecar(out, suffix), bytes)?;
    }
    fs::write(sidecar(out, ".manifest.json"), json)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli)
}

pub fn execute(cli: Cli) -> Result<()> {
    let out = cli.out.clone().ok_or_else(|| anyhow!("--out is required"))?;
    let pool = pool(cli.workers)?;
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Phase(args) => {
            let mut cfg: PhaseConfig = load_config(config_path, "phase")?;
            apply_phase(&mut cfg, args, cli.seed);
            cfg.resolve()?;
            let spec = cfg.spec()?;
            let cells = pool.install(|| phase_transition(&spec))?;
            let mut body = Vec::new();
            write_phase_csv(&cells, cfg.curve, &mut body)?;
            write_outputs(&out, "phase", cfg.seed, &cfg, &body, None)
        }
        Command::Curve(args) => {
            let mut cfg: CurveConfig = load_config(config_path, "curve")?;
            if let Some(d) = args.deltas {
                cfg.deltas = d;
            }
            if cfg.deltas.is_empty() {
                bail!("no delta values");
            }
            let mut body = Vec::new();
            write_curve_csv(&cfg.deltas, &mut body)?;
            write_outputs(&out, "curve", cli.seed.unwrap_or(0), &cfg, &body, None)
        }
        Command::Channel(args) => {
            let mut cfg: ChannelConfig = load_config(config_path, "channel")?;
            apply_channel(&mut cfg, args, cli.seed);
            cfg.resolve()?;
            let spec = cfg.spec()?;
            let rows = pool.install(|| channel_benchmark(&spec))?;
            let mut body = Vec::new();
            write_channel_csv(&spec.preset, spec.snr_db, &rows, &mut body)?;
            write_outputs(&out, "channel", cfg.seed, &cfg, &body, None)
        }
        Command::Recover(args) => {
            let mut cfg: RecoverConfig = load_config(config_path, "recover")?;
            apply_recover(&mut cfg, args, cli.seed);
            cfg.resolve()?;
            let (estimate, summary) = pool.install(|| recover(&cfg))?;
            let mut body = Vec::new();
            write_vector_csv(&estimate, &mut body)?;
            let mut summary = serde_json::to_vec_pretty(&summary)?;
            summary.push(b'\n');
            write_outputs(&out, "recover", cfg.seed, &cfg, &body, Some((".summary.json", summary)))
        }
    }
}

fn apply_phase(cfg: &mut PhaseConfig, a: PhaseArgs, seed: Option<u64>) {
    if let Some(v) = a.algo {
        cfg.algo = v;
    }
    if let Some(v) = a.deltas {
        cfg.deltas = v;
    }
    if let Some(v) = a.rho_prime {
        cfg.rho_prime = Some(v);
        cfg.rho = None;
    }
    if let Some(v) = a.rho {
        cfg.rho = Some(v);
        cfg.rho_prime = None;
    }
    if let Some(v) = a.n {
        cfg.n = v;
        cfg.n_dynamic = None;
    }
    if let Some(v) = a.n_dynamic {
        if let [lo, hi] = v[..] {
            if let ampcs::experiments::NPolicy::Dynamic(t) =
                ampcs::experiments::NPolicy::geometric(&cfg.deltas, lo, hi)
            {
                cfg.n_dynamic = Some(t);
            }
        } else {
            // Rejected by resolve through an empty table.
            cfg.n_dynamic = Some(Vec::new());
        }
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.max_iters {
        cfg.amp.max_iters = v;
    }
    if let Some(v) = a.threshold_db {
        cfg.success_threshold_db = v;
    }
    if a.curve {
        cfg.curve = true;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

fn apply_channel(cfg: &mut ChannelConfig, a: ChannelArgs, seed: Option<u64>) {
    if let Some(p) = a.preset {
        cfg.preset = PresetRef::Name(p);
    }
    if let Some(v) = a.m_values {
        cfg.m_values = Some(v);
    }
    if let Some(v) = a.algorithms {
        cfg.algorithms = v;
    }
    if let Some(v) = a.realizations {
        cfg.realizations = v;
    }
    if let Some(v) = a.snr_db {
        cfg.snr_db = Some(v);
    }
    if let Some(v) = a.max_iters {
        cfg.amp.max_iters = v;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

fn apply_recover(cfg: &mut RecoverConfig, a: RecoverArgs, seed: Option<u64>) {
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = a.$field {
                cfg.$field = Some(v);
            }
        )*};
    }
    set!(matrix, measurement, truth, m, n, k, snr_db, tau);
    if let Some(v) = a.algo {
        cfg.algo = v;
    }
    if let Some(v) = a.matrix_kind {
        cfg.matrix_kind = v;
    }
    if let Some(v) = a.max_iters {
        cfg.amp.max_iters = v;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

#[derive(Debug, Serialize)]
struct RecoverSummary {
    algorithm: Algorithm,
    m: usize,
    n: usize,
    iterations: usize,
    status: RecoveryStatus,
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmse_db: Option<f64>,
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_vector_csv(file)?)
}

fn recover(cfg: &RecoverConfig) -> Result<(Vec<f64>, RecoverSummary)> {
    let seed = ampcs::seed::derive;
    let a: SensingMatrix = match &cfg.matrix {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            SensingMatrix::read_csv(file)?
        }
        None => {
            let (m, n) = (cfg.m.unwrap_or(0), cfg.n.unwrap_or(0));
            match cfg.matrix_kind {
                MatrixKind::Gaussian => gaussian_matrix(m, n, seed(cfg.seed, 0))?,
                MatrixKind::ToeplitzBpsk => toeplitz_bpsk_matrix(m, n, seed(cfg.seed, 0))?,
                MatrixKind::Dense => bail!("a dense matrix must be supplied as a file"),
            }
        }
    };
    let truth: Option<Vec<f64>> = match (&cfg.truth, &cfg.measurement) {
        (Some(path), _) => Some(read_vector(path)?),
        (None, None) => {
            let k = cfg.k.ok_or_else(|| anyhow!("k is required to generate a signal"))?;
            Some(strictly_sparse(a.cols(), k, seed(cfg.seed, 1))?.values)
        }
        (None, Some(_)) => None,
    };
    if let Some(h) = &truth {
        if h.len() != a.cols() {
            bail!("truth has length {}, matrix has {} columns", h.len(), a.cols());
        }
    }
    let y = match &cfg.measurement {
        Some(path) => read_vector(path)?,
        None => {
            let h = truth.as_ref().expect("truth exists without a measurement");
            let clean = a.forward(h)?;
            match cfg.snr_db {
                Some(snr) => add_noise(&clean, snr, seed(cfg.seed, 2))?.0,
                None => clean,
            }
        }
    };
    if y.len() != a.rows() {
        bail!("measurement has length {}, matrix has {} rows", y.len(), a.rows());
    }
    let support = || -> Vec<usize> {
        let h = truth.as_ref().expect("checked in resolve");
        match cfg.k {
            Some(k) => top_indices(h, k),
            None => (0..h.len()).filter(|&i| h[i] != 0.0).collect(),
        }
    };

    let (estimate, iterations, status, tau) = match cfg.algo {
        Algorithm::SAmp | Algorithm::HAmp => {
            let kind = if cfg.algo == Algorithm::SAmp { ThresholdKind::Soft } else { ThresholdKind::Hard };
            let mut amp = cfg.amp;
            amp.thresholder.kind = kind;
            let (result, tau) = match (cfg.tau, &truth) {
                (Some(tau), _) => (amp_run(&a, &y, &amp.with_tau(tau))?, tau),
                (None, Some(h)) => {
                    let grid = cfg.tau_grid.clone().unwrap_or_else(|| default_tau_grid(kind));
                    let search = tune_tau_oracle(&a, &y, h, &grid, &amp)?;
                    (search.result, search.best_tau)
                }
                (None, None) => bail!("AMP without a truth signal needs a fixed tau"),
            };
            (result.estimate, result.iterations_run, result.status, Some(tau))
        }
        Algorithm::Cosamp => {
            let k = match cfg.k {
                Some(k) => k,
                None => support().len(),
            };
            let r = cosamp(&a, &y, k, cfg.cosamp_max_iters, cfg.cosamp_stop_tol)?;
            (r.estimate, r.iterations_run, r.status, None)
        }
        Algorithm::Ls => (least_squares(&a, &y)?, 1, RecoveryStatus::Converged, None),
        Algorithm::OptLs => (oracle_ls(&a, &y, &support())?, 1, RecoveryStatus::Converged, None),
    };
    let nmse_db = match &truth {
        Some(h) => Some(clamp_db(nmse_db(&estimate, h)?)),
        None => None,
    };
    let summary = RecoverSummary {
        algorithm: cfg.algo,
        m: a.rows(),
        n: a.cols(),
        iterations,
        status,
        tau,
        nmse_db,
    };
    Ok((estimate, summary))
}
