//! Benchmark CLI: single runs, sigma sweeps, and node-set snapshots.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use meshfd::bench::{self, ExperimentConfig, Method, SweepRow};
use meshfd::error::{Error, Result};
use meshfd::nodes::NodeSet;

#[derive(Parser)]
#[command(
    name = "meshfd",
    version,
    about = "Meshless Poisson benchmark: RBF-FD vs hybrid virtual-stencil discretizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and emit a single CSV row
    Run(RunOpts),
    /// Run a sigma sweep and emit one CSV row per value
    Sweep(SweepOpts),
    /// Generate the node set and emit it as CSV (x,y,boundary)
    Nodes(NodesOpts),
}

#[derive(Args)]
struct CommonOpts {
    /// Key-value config file (`key = value` lines); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target fill distance
    #[arg(long)]
    h: Option<f64>,
    /// Node generation seed
    #[arg(long)]
    seed: Option<u64>,
    /// One of: rbf_fd, hybrid5, hybrid9, hybrid5_alt, hybrid9_alt
    #[arg(long)]
    method: Option<String>,
    /// Monomial augmentation degree (stencil size follows as 2*binom(m+2,2))
    #[arg(long)]
    m: Option<u32>,
    /// Virtual stencil scale, delta = sigma * h (ignored by rbf_fd)
    #[arg(long)]
    sigma: Option<f64>,
    /// Timed repetitions per phase (one warm-up run is discarded)
    #[arg(long)]
    repeats: Option<usize>,
    /// Relative residual target of the iterative solver
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap (defaults to 10x the node count)
    #[arg(long)]
    max_iter: Option<usize>,
    /// ILUT fill factor
    #[arg(long)]
    fill_factor: Option<f64>,
    /// ILUT drop tolerance
    #[arg(long)]
    drop_tol: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Also write the assembled system in Matrix Market format
    #[arg(long)]
    export_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct SweepOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Comma-separated sigma values (default: 40 log-spaced in [0.01, 10])
    #[arg(long)]
    sigmas: Option<String>,
}

#[derive(Args)]
struct NodesOpts {
    /// Target fill distance
    #[arg(long)]
    h: Option<f64>,
    /// Node generation seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 11] = [
    "h",
    "seed",
    "method",
    "m",
    "sigma",
    "sigmas",
    "repeats",
    "tol",
    "max_iter",
    "fill_factor",
    "drop_tol",
];

fn load_config_file(path: &Option<PathBuf>) -> Result<HashMap<String, String>> {
    let Some(path) = path else {
        return Ok(HashMap::new());
    };
    let text = fs::read_to_string(path)?;
    let map = bench::parse_key_values(&text)?;
    for key in map.keys() {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown config key {key:?}; expected one of {CONFIG_KEYS:?}"
            )));
        }
    }
    Ok(map)
}

/// Flag value if given, else config-file value, else default.
fn pick<T: FromStr + Copy>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::Config(format!("config key {key}: cannot parse {raw:?}"))),
        None => Ok(default),
    }
}

fn resolve_config(opts: &CommonOpts) -> Result<(ExperimentConfig, HashMap<String, String>)> {
    let file = load_config_file(&opts.config)?;
    let defaults = ExperimentConfig::default();

    let method = match (&opts.method, file.get("method")) {
        (Some(name), _) => name.parse::<Method>()?,
        (None, Some(name)) => name.parse::<Method>()?,
        (None, None) => defaults.method,
    };
    let mut solver = defaults.solver;
    solver.tol = pick(opts.tol, &file, "tol", solver.tol)?;
    solver.max_iter = match (opts.max_iter, file.get("max_iter")) {
        (Some(v), _) => Some(v),
        (None, Some(raw)) => Some(raw.parse().map_err(|_| {
            Error::Config(format!("config key max_iter: cannot parse {raw:?}"))
        })?),
        (None, None) => None,
    };
    solver.ilut.fill_factor = pick(opts.fill_factor, &file, "fill_factor", solver.ilut.fill_factor)?;
    solver.ilut.drop_tol = pick(opts.drop_tol, &file, "drop_tol", solver.ilut.drop_tol)?;

    let cfg = ExperimentConfig {
        h: pick(opts.h, &file, "h", defaults.h)?,
        seed: pick(opts.seed, &file, "seed", defaults.seed)?,
        method,
        degree: pick(opts.m, &file, "m", defaults.degree)?,
        phs_order: defaults.phs_order,
        sigma: pick(opts.sigma, &file, "sigma", defaults.sigma)?,
        repeats: pick(opts.repeats, &file, "repeats", defaults.repeats)?,
        solver,
    };
    Ok((cfg, file))
}

fn parse_sigmas(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse sigma value {tok:?}")))
        })
        .collect()
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(opts: &RunOpts) -> Result<()> {
    let (cfg, _) = resolve_config(&opts.common)?;
    let nodes = NodeSet::generate(cfg.h, cfg.seed)?;
    if let Some(path) = &opts.export_matrix {
        let sys = bench::assemble_poisson(&cfg, &nodes)?;
        let mut file = BufWriter::new(File::create(path)?);
        sys.matrix.write_matrix_market(&mut file)?;
        file.flush()?;
    }
    let outcome = match bench::run_experiment_on(&cfg, &nodes) {
        Ok(outcome) => Some(outcome),
        Err(e) if e.is_numeric() => {
            eprintln!("run failed numerically: {e}");
            None
        }
        Err(fatal) => return Err(fatal),
    };
    let row = SweepRow::from_run(&cfg, outcome)?;
    let mut w = open_output(&opts.common.out)?;
    bench::write_csv(&[row], &mut w)?;
    Ok(w.flush()?)
}

fn cmd_sweep(opts: &SweepOpts) -> Result<()> {
    let (cfg, file) = resolve_config(&opts.common)?;
    let sigmas = match (&opts.sigmas, file.get("sigmas")) {
        (Some(raw), _) => parse_sigmas(raw)?,
        (None, Some(raw)) => parse_sigmas(raw)?,
        (None, None) => bench::default_sigma_grid(),
    };
    let rows = bench::run_sigma_sweep(&cfg, &sigmas)?;
    let mut w = open_output(&opts.common.out)?;
    bench::write_csv(&rows, &mut w)?;
    Ok(w.flush()?)
}

fn cmd_nodes(opts: &NodesOpts) -> Result<()> {
    let defaults = ExperimentConfig::default();
    let nodes = NodeSet::generate(
        opts.h.unwrap_or(defaults.h),
        opts.seed.unwrap_or(defaults.seed),
    )?;
    let mut w = open_output(&opts.out)?;
    nodes.write_csv(&mut w)?;
    Ok(w.flush()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(opts) => cmd_run(opts),
        Command::Sweep(opts) => cmd_sweep(opts),
        Command::Nodes(opts) => cmd_nodes(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
