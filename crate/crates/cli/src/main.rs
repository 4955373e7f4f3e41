//! `nodal` -- batch experiment runner.
//!
//! Subcommands map one-to-one onto the library surface: `lattice` (exact
//! arithmetic and energy diagnostics), `predict` (closed-form prediction
//! report), `simulate` (Monte Carlo experiment), `verify` (invariant
//! suite), `probe` (determinant scaling probe).
//!
//! Exit codes: 0 success, 1 numeric/invariant failure, 2 usage or parse
//! error.

mod output;
mod verify;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nodal_core::*;
use output::{emit, Meta};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "nodal", version, about = "Nodal intersections of arithmetic random waves: predictions and Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with default parameter values (flag names as keys);
    /// explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_parser = ["json", "csv"], default_value = "json")]
    format: String,

    /// Omit the metadata block (timestamps), for byte-reproducible output.
    #[arg(long, global = true)]
    no_meta: bool,

    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate lattice points and emit arithmetic diagnostics.
    Lattice(LatticeArgs),
    /// Closed-form prediction report for one (m, curve) pair.
    Predict(PredictArgs),
    /// Monte Carlo zero-count experiment.
    Simulate(SimulateArgs),
    /// Run the invariant suite; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Determinant scaling probe near the diagonal.
    Probe(ProbeArgs),
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long)]
    m: Option<u64>,
    /// Cap for the divisor diagnostic (default N^4).
    #[arg(long)]
    divisor_cap: Option<f64>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    m: Option<u64>,
    /// Curve spec, e.g. circle:r=0.2,arc=1.0[,cx=,cy=,phase=].
    #[arg(long)]
    curve: Option<String>,
    /// Gauss-Legendre order per axis; 0 = oscillation-resolving default.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Also compute the second-moment record (Parseval cross-check).
    #[arg(long)]
    moments: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scan points per shortest oscillation scale (>= 4).
    #[arg(long)]
    oversample: Option<f64>,
    /// Write per-trial counts as CSV to this path.
    #[arg(long)]
    dump_trials: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Upper energy level for the range sweeps.
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    curve: Option<String>,
    /// Base point as a fraction of the curve length.
    #[arg(long)]
    t1_frac: Option<f64>,
    /// Window bounds in units of 1/sqrt(m).
    #[arg(long)]
    z_lo: Option<f64>,
    #[arg(long)]
    z_hi: Option<f64>,
    /// Number of log-spaced probe separations.
    #[arg(long)]
    points: Option<usize>,
}

/// Config-file schema: every key optional, flags override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    m: Option<u64>,
    curve: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    oversample: Option<f64>,
    quad_order: Option<usize>,
    divisor_cap: Option<f64>,
    m_max: Option<u64>,
    t1_frac: Option<f64>,
    z_lo: Option<f64>,
    z_hi: Option<f64>,
    points: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // usage/config problems exit 2, numeric failures exit 1
            if e.downcast_ref::<Error>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing config JSON")?
        }
        None => FileConfig::default(),
    };
    if let Some(cmd) = &file.command {
        let actual = match cli.command {
            Command::Lattice(_) => "lattice",
            Command::Predict(_) => "predict",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Probe(_) => "probe",
        };
        if cmd != actual {
            bail!("config file is for command '{cmd}', invoked '{actual}'");
        }
    }
    let meta = if cli.no_meta { None } else { Some(Meta::now()) };

    match &cli.command {
        Command::Lattice(args) => cmd_lattice(&cli, args, &file, meta),
        Command::Predict(args) => cmd_predict(&cli, args, &file, meta),
        Command::Simulate(args) => cmd_simulate(&cli, args, &file, meta),
        Command::Verify(args) => cmd_verify(args, &file),
        Command::Probe(args) => cmd_probe(&cli, args, &file, meta),
    }
}

fn require_positive_m(m: Option<u64>) -> anyhow::Result<u64> {
    match m {
        Some(m) if m >= 1 => Ok(m),
        Some(m) => bail!("--m must be >= 1 (got {m})"),
        None => bail!("missing --m"),
    }
}

fn parse_curve(spec: &Option<String>) -> anyhow::Result<(TorusCurve, String)> {
    let spec = spec.as_deref().context("missing --curve")?;
    let curve: TorusCurve = spec
        .parse()
        .map_err(|e| anyhow::anyhow!("bad curve spec: {e}"))?;
    Ok((curve, spec.to_string()))
}

#[derive(Debug, Serialize)]
struct LatticeConfig {
    command: &'static str,
    m: u64,
    divisor_cap: f64,
}

#[derive(Debug, Serialize)]
struct LatticeReport {
    m: u64,
    n: usize,
    points: Vec<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    riesz_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    riesz_per_point: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_sum_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse_norm_sum: Option<f64>,
    divisor_diagnostic: f64,
}

fn cmd_lattice(
    cli: &Cli,
    args: &LatticeArgs,
    file: &FileConfig,
    meta: Option<Meta>,
) -> anyhow::Result<ExitCode> {
    let m = require_positive_m(args.m.or(file.m))?;
    let set = enumerate_lattice_points(m);
    let cap = args
        .divisor_cap
        .or(file.divisor_cap)
        .unwrap_or_else(|| (set.n() as f64).powi(4).max(1.0));
    if cap < 0.0 {
        bail!("--divisor-cap must be nonnegative");
    }
    let config = LatticeConfig {
        command: "lattice",
        m,
        divisor_cap: cap,
    };
    let (tau4, riesz, quads) = if set.is_empty() {
        (None, None, None)
    } else {
        let riesz = if set.n() >= 2 {
            Some(set.riesz_energy()?)
        } else {
            None
        };
        (
            Some(set.tau_fourier(4)?),
            riesz,
            Some(set.quadruple_diagnostics()),
        )
    };
    let report = LatticeReport {
        m,
        n: set.n(),
        points: set.points().to_vec(),
        tau4,
        riesz_energy: riesz.map(|r| r.energy),
        riesz_per_point: riesz.map(|r| r.per_point),
        zero_sum_count: quads.as_ref().map(|q| q.zero_sum_count),
        inverse_norm_sum: quads.as_ref().map(|q| q.inverse_norm_sum),
        divisor_diagnostic: divisor_diagnostic(m, cap),
    };
    emit(cli.out.as_deref(), &cli.format, &config, meta, &report)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct PredictConfig {
    command: &'static str,
    m: u64,
    curve: String,
    quad_order: usize,
}

#[derive(Debug, Serialize)]
struct PredictReportOut {
    #[serde(flatten)]
    prediction: PredictionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    moments: Option<SecondMoments>,
}

fn cmd_predict(
    cli: &Cli,
    args: &PredictArgs,
    file: &FileConfig,
    meta: Option<Meta>,
) -> anyhow::Result<ExitCode> {
    let m = require_positive_m(args.m.or(file.m))?;
    let (curve, curve_spec) = parse_curve(&args.curve.clone().or_else(|| file.curve.clone()))?;
    let quad_order = args.quad_order.or(file.quad_order).unwrap_or(0);
    let set = enumerate_lattice_points(m);
    let prediction = variance_prediction(&set, &curve, quad_order)?;
    for w in &prediction.warnings {
        eprintln!("warning: {w}");
    }
    let config = PredictConfig {
        command: "predict",
        m,
        curve: curve_spec,
        quad_order: prediction.quad_order,
    };
    let moments = if args.moments {
        Some(second_moments(&set, &curve, quad_order)?)
    } else {
        None
    };
    let report = PredictReportOut {
        prediction,
        moments,
    };
    emit(cli.out.as_deref(), &cli.format, &config, meta, &report)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct SimulateConfig {
    command: &'static str,
    m: u64,
    curve: String,
    trials: u64,
    seed: u64,
    oversample: f64,
}

fn cmd_simulate(
    cli: &Cli,
    args: &SimulateArgs,
    file: &FileConfig,
    meta: Option<Meta>,
) -> anyhow::Result<ExitCode> {
    let m = require_positive_m(args.m.or(file.m))?;
    let (curve, curve_spec) = parse_curve(&args.curve.clone().or_else(|| file.curve.clone()))?;
    let trials = args.trials.or(file.trials).context("missing --trials")?;
    if trials < 2 {
        bail!("--trials must be >= 2");
    }
    let seed = args.seed.or(file.seed).context("missing --seed")?;
    let oversample = args.oversample.or(file.oversample).unwrap_or(8.0);
    if oversample < 4.0 {
        bail!("--oversample must be >= 4");
    }
    let set = enumerate_lattice_points(m);
    let report = run_experiment(&set, &curve, trials, seed, oversample, 0)?;
    if let Some(path) = &args.dump_trials {
        let f = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        report.write_trial_csv(std::io::BufWriter::new(f))?;
    }
    let config = SimulateConfig {
        command: "simulate",
        m,
        curve: curve_spec,
        trials,
        seed,
        oversample,
    };
    emit(cli.out.as_deref(), &cli.format, &config, meta, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs, file: &FileConfig) -> anyhow::Result<ExitCode> {
    let m_max = args.m_max.or(file.m_max).unwrap_or(200);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    if m_max < 2 {
        bail!("--m-max must be >= 2");
    }
    let failures = verify::run_suite(m_max, seed);
    if failures == 0 {
        println!("verify: all checks passed (m <= {m_max})");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify: {failures} check(s) FAILED");
        Ok(ExitCode::from(1))
    }
}

#[derive(Debug, Serialize)]
struct ProbeConfig {
    command: &'static str,
    m: u64,
    curve: String,
    t1_frac: f64,
    z_lo: f64,
    z_hi: f64,
    points: usize,
}

fn cmd_probe(
    cli: &Cli,
    args: &ProbeArgs,
    file: &FileConfig,
    meta: Option<Meta>,
) -> anyhow::Result<ExitCode> {
    let m = require_positive_m(args.m.or(file.m))?;
    let (curve, curve_spec) = parse_curve(&args.curve.clone().or_else(|| file.curve.clone()))?;
    let t1_frac = args.t1_frac.or(file.t1_frac).unwrap_or(0.37);
    let z_lo = args.z_lo.or(file.z_lo).unwrap_or(1e-3);
    let z_hi = args.z_hi.or(file.z_hi).unwrap_or(1e-2);
    let points = args.points.or(file.points).unwrap_or(12);
    if !(t1_frac > 0.0 && t1_frac < 1.0) {
        bail!("--t1-frac must be in (0, 1)");
    }
    if !(z_lo > 0.0 && z_hi > z_lo) || points < 2 {
        bail!("need 0 < z-lo < z-hi and --points >= 2");
    }
    let set = enumerate_lattice_points(m);
    let sqrt_m = (m as f64).sqrt();
    let zs: Vec<f64> = (0..points)
        .map(|k| z_lo / sqrt_m * (z_hi / z_lo).powf(k as f64 / (points - 1) as f64))
        .collect();
    let report = detsigma_scaling_probe(&set, &curve, t1_frac * curve.length(), &zs)?;
    let config = ProbeConfig {
        command: "probe",
        m,
        curve: curve_spec,
        t1_frac,
        z_lo,
        z_hi,
        points,
    };
    emit(cli.out.as_deref(), &cli.format, &config, meta, &report)?;
    Ok(ExitCode::SUCCESS)
}
