//! `hoci`: closed-form curves, the discrete oracle, and sample-based
//! common-information estimation from the command line.
//!
//! Errors are printed as `error[CODE]: message` and the process exits with
//! status 1.

use clap::{Args, Parser, Subcommand};
use hoci_core::discrete;
use hoci_core::io::{self, GaussianSweep, IngestOptions};
use hoci_core::pipeline::{self, RunOptions};
use hoci_core::sci;
use hoci_core::{BisectionConfig, ChannelMatrix, EstimatorConfig, HociError, Method, Result, SampleMode};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hoci", version, about = "Higher-order common information toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Gaussian curves as a CSV table.
    Gaussian(GaussianArgs),
    /// Verify the discrete shared-symbol construction against its oracle.
    Discrete(DiscreteArgs),
    /// Estimate R2, R3 and R4 lower bounds from a channel file.
    Estimate(EstimateArgs),
    /// Build and verify one SCI variable.
    Sci(SciArgs),
    /// Lag-maximized correlation of every channel against a reference.
    Lagscan(LagscanArgs),
}

#[derive(Args)]
struct GaussianArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma_x2: f64,
    /// List `a,b,c` or `lin:start:stop:count` / `log:start:stop:count`.
    #[arg(long, default_value = "log:0.001:1000:61")]
    sigma_n2_grid: String,
    #[arg(long, default_value = "lin:-0.9:0.99:201")]
    rho_grid: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscreteArgs {
    /// Number of variables.
    #[arg(long)]
    n: usize,
    /// Alphabet size of each hidden symbol (uniform unless --pmf is given).
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    /// Explicit symbol distribution, e.g. `0.25,0.75`.
    #[arg(long)]
    pmf: Option<String>,
    /// Also draw this many samples of the construction.
    #[arg(long, requires = "samples_out")]
    samples: Option<usize>,
    /// CSV destination for the drawn samples.
    #[arg(long, requires = "samples")]
    samples_out: Option<PathBuf>,
    #[arg(long, env = "HOCI_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Channel CSV (rows = time, header = channel names).
    #[arg(long)]
    input: PathBuf,
    /// Rows are channels, first cell is the name.
    #[arg(long)]
    transpose: bool,
    #[arg(long)]
    sample_rate: Option<f64>,
}

impl InputArgs {
    fn load(&self) -> Result<ChannelMatrix> {
        io::ingest_csv(
            &self.input,
            &IngestOptions {
                transpose: self.transpose,
                sample_rate_hz: self.sample_rate,
            },
        )
    }
}

#[derive(Args)]
struct EstimatorArgs {
    /// gaussian | knn | binned
    #[arg(long, default_value = "gaussian")]
    estimator: String,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    bins: usize,
    #[arg(long, default_value_t = 3)]
    ts_lag: usize,
    /// Use the bidirectional transfer-entropy proxy for every pairwise term.
    #[arg(long)]
    time_series: bool,
    /// SCI residual tolerance in bits.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 60)]
    max_iters: usize,
    #[arg(long, env = "HOCI_SEED", default_value_t = 0)]
    seed: u64,
}

impl EstimatorArgs {
    fn estimator(&self) -> Result<EstimatorConfig> {
        let cfg = EstimatorConfig {
            method: self.estimator.parse::<Method>()?,
            mode: if self.time_series {
                SampleMode::TimeSeries
            } else {
                SampleMode::Iid
            },
            k: self.k,
            bins: self.bins,
            ts_lag: self.ts_lag,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn bisection(&self) -> Result<BisectionConfig> {
        let b = BisectionConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iters,
            ..Default::default()
        };
        b.validate()?;
        Ok(b)
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    est: EstimatorArgs,
    /// Highest order to estimate (2, 3 or 4).
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SciArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    est: EstimatorArgs,
    /// `i,j` as channel names or 0-based indices; noise goes on `j`.
    #[arg(long)]
    pair: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LagscanArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    ref_channel: String,
    /// Used with --sample-rate.
    #[arg(long, default_value_t = 190.0)]
    lag_min_ms: f64,
    #[arg(long, default_value_t = 300.0)]
    lag_max_ms: f64,
    /// Lag bounds in samples; required when no sample rate is known.
    #[arg(long, requires = "lag_max_samples")]
    lag_min_samples: Option<usize>,
    #[arg(long, requires = "lag_min_samples")]
    lag_max_samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HociError::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn resolve_channel(m: &ChannelMatrix, key: &str) -> Result<usize> {
    let key = key.trim();
    if let Some(i) = m.index_of(key) {
        return Ok(i);
    }
    match key.parse::<usize>() {
        Ok(i) if i < m.num_channels() => Ok(i),
        _ => Err(HociError::Configuration(format!("unknown channel '{key}'"))),
    }
}

fn run_gaussian(a: &GaussianArgs) -> Result<()> {
    let sweep = GaussianSweep {
        sigma_x2: a.sigma_x2,
        sigma_n2: io::parse_grid(&a.sigma_n2_grid)?,
        rho: io::parse_grid(&a.rho_grid)?,
    };
    match &a.out {
        Some(p) => io::emit_gaussian_curves(&sweep, p).map(|_| ()),
        None => io::write_gaussian_curves(&sweep, std::io::stdout().lock()).map(|_| ()),
    }
}

fn run_discrete(a: &DiscreteArgs) -> Result<()> {
    let pmf = match &a.pmf {
        Some(s) => io::parse_grid(s)?,
        None => {
            if a.alphabet < 2 {
                return Err(HociError::Configuration("alphabet must be at least 2".into()));
            }
            discrete::uniform_pmf(a.alphabet)
        }
    };
    let check = discrete::verify_theorem5(a.n, &pmf)?;
    if let Some(count) = a.samples {
        let ens = discrete::build_ensemble(a.n, &pmf)?;
        let m = discrete::sample_channels(&ens, count, a.seed)?;
        if let Some(p) = &a.samples_out {
            io::write_channels_csv(&m, p)?;
        }
    }
    let doc = json!({
        "config": { "n": a.n, "pmf": pmf, "samples": a.samples, "seed": a.seed },
        "verification": check,
    });
    write_out(&a.out, &pretty(&doc))?;
    if !check.passed {
        return Err(HociError::Pipeline("discrete verification failed".into()));
    }
    Ok(())
}

fn run_estimate(a: &EstimateArgs) -> Result<()> {
    let m = a.input.load()?;
    let opts = RunOptions {
        order: a.order,
        seed: a.est.seed,
        estimator: a.est.estimator()?,
        bisection: a.est.bisection()?,
    };
    let report = pipeline::run(&m, &opts)?;
    match &a.out {
        Some(p) => io::emit_report(&report, p),
        None => write_out(&None, &io::report_to_json(&report)?),
    }
}

fn run_sci(a: &SciArgs) -> Result<()> {
    let m = a.input.load()?;
    let parts: Vec<&str> = a.pair.split(',').collect();
    let [pi, pj] = parts.as_slice() else {
        return Err(HociError::Configuration(format!("--pair expects 'i,j', got '{}'", a.pair)));
    };
    let (i, j) = (resolve_channel(&m, pi)?, resolve_channel(&m, pj)?);
    if i == j {
        return Err(HociError::Configuration("--pair needs two different channels".into()));
    }
    let cfg = a.est.estimator()?;
    let bis = a.est.bisection()?;
    let seed = hoci_core::numeric::derive_seed(a.est.seed, &[i as u64, j as u64, 2]);
    let (desc, t) = sci::build_sci(m.channel(i), m.channel(j), &cfg, &bis, seed)?;
    let desc = desc.with_channels(i, j);
    let check = sci::verify_sci(&t, &m, i, j, &cfg, None)?;
    let doc = json!({
        "tool": "hoci",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": a.est.seed,
        "channels": m.names(),
        "pair": [m.names()[i], m.names()[j]],
        "estimator": cfg,
        "bisection": bis,
        "descriptor": desc,
        "verification": check,
    });
    write_out(&a.out, &pretty(&doc))
}

fn run_lagscan(a: &LagscanArgs) -> Result<()> {
    let m = a.input.load()?;
    let r = resolve_channel(&m, &a.ref_channel)?;
    let reference = m.channel(r);
    let mut rows = Vec::new();
    for (c, name) in m.names().iter().enumerate() {
        if c == r {
            continue;
        }
        let x = m.channel(c);
        let res = match (a.lag_min_samples, a.lag_max_samples, m.sample_rate_hz()) {
            (Some(lo), Some(hi), _) => pipeline::lag_max_correlation_samples(reference, x, lo, hi)?,
            (_, _, Some(rate)) => {
                pipeline::lag_max_correlation(reference, x, a.lag_min_ms / 1e3, a.lag_max_ms / 1e3, rate)?
            }
            _ => {
                return Err(HociError::Configuration(
                    "lag scan needs --sample-rate or --lag-min-samples/--lag-max-samples".into(),
                ))
            }
        };
        rows.push(json!({ "channel": name, "result": res }));
    }
    let doc = json!({
        "tool": "hoci",
        "version": env!("CARGO_PKG_VERSION"),
        "reference": m.names()[r],
        "sample_rate_hz": m.sample_rate_hz(),
        "lag_min_ms": a.lag_min_ms,
        "lag_max_ms": a.lag_max_ms,
        "lag_min_samples": a.lag_min_samples,
        "lag_max_samples": a.lag_max_samples,
        "channels": rows,
    });
    write_out(&a.out, &pretty(&doc))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gaussian(a) => run_gaussian(a),
        Command::Discrete(a) => run_discrete(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Sci(a) => run_sci(a),
        Command::Lagscan(a) => run_lagscan(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
