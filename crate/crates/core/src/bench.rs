//! Benchmark harness: runs the Poisson problem with a chosen discretization
//! method, measures the two phases of the solution procedure, and reports
//! relative errors against the analytic solution.
//!
//! Phase 1 covers stencil search and weight-row computation; phase 2 is the
//! iterative solve. Node generation and CSR assembly are untimed. Each phase
//! is run `repeats` times after one discarded warm-up run and the medians
//! are reported. Everything except the timing columns is deterministic for a
//! fixed configuration.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::hybrid::{assemble_all_hybrid, make_virtual_stencil, HybridWeights, StencilKind, Variant};
use crate::nodes::{NodeSet, Point2};
use crate::rbf::RbfConfig;
use crate::rbf_fd::{assemble_all_weights, Operator, OperatorWeights};
use crate::solver::{solve_bicgstab_ilut, SolveReport, SolverParams};
use crate::sparse::{assemble_system, SparseSystem};

/// Interior values of the manufactured solution smaller than this are
/// excluded from relative errors (cannot happen for the sine product on
/// generated interiors; guard only).
const RELATIVE_ERROR_FLOOR: f64 = 1e-300;

/// Discretization method under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    RbfFd,
    Hybrid5,
    Hybrid9,
    Hybrid5Alt,
    Hybrid9Alt,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::RbfFd,
        Method::Hybrid5,
        Method::Hybrid9,
        Method::Hybrid5Alt,
        Method::Hybrid9Alt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::RbfFd => "rbf_fd",
            Method::Hybrid5 => "hybrid5",
            Method::Hybrid9 => "hybrid9",
            Method::Hybrid5Alt => "hybrid5_alt",
            Method::Hybrid9Alt => "hybrid9_alt",
        }
    }

    pub fn stencil_kind(self) -> Option<StencilKind> {
        match self {
            Method::RbfFd => None,
            Method::Hybrid5 | Method::Hybrid5Alt => Some(StencilKind::FivePoint),
            Method::Hybrid9 | Method::Hybrid9Alt => Some(StencilKind::NinePoint),
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::RbfFd => None,
            Method::Hybrid5 | Method::Hybrid9 => Some(Variant::Shared),
            Method::Hybrid5Alt | Method::Hybrid9Alt => Some(Variant::PerVirtualNode),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?}; expected one of rbf_fd, hybrid5, hybrid9, hybrid5_alt, hybrid9_alt"
                ))
            })
    }
}

/// One benchmark configuration. The stencil size is always derived from the
/// augmentation degree as `n = 2 * binom(m + 2, 2)`.
#[derive(Clone, Copy, Debug)]
pub struct ExperimentConfig {
    pub h: f64,
    pub seed: u64,
    pub method: Method,
    /// Monomial augmentation degree `m`.
    pub degree: u32,
    /// PHS order; the benchmark uses 3 throughout.
    pub phs_order: u32,
    /// Virtual stencil scale (`delta = sigma * h`); ignored by `rbf_fd`.
    pub sigma: f64,
    /// Timed runs per phase (one extra warm-up run is discarded).
    pub repeats: usize,
    pub solver: SolverParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            h: 0.05,
            seed: 1,
            method: Method::RbfFd,
            degree: 2,
            phs_order: 3,
            sigma: 1.0,
            repeats: 25,
            solver: SolverParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn rbf_config(&self) -> Result<RbfConfig> {
        RbfConfig::new(self.phs_order, self.degree)
    }

    fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Analytic solution of the benchmark problem.
pub fn analytic_u(p: Point2) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}

/// Matching source term, `laplacian(u) = f`.
pub fn analytic_f(p: Point2) -> f64 {
    -2.0 * PI * PI * analytic_u(p)
}

/// Relative errors against the analytic solution over interior nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub max_rel: f64,
    pub mean_rel: f64,
    /// Interior nodes entering the error sums.
    pub interior_count: usize,
    /// Interior nodes skipped by the tiny-denominator guard.
    pub excluded: usize,
}

/// Computes max and mean relative error over interior nodes. The mean
/// divides by the interior node count; boundary nodes carry the exact
/// Dirichlet data and are excluded.
pub fn compute_errors(nodes: &NodeSet, solution: &[f64]) -> ErrorReport {
    assert_eq!(solution.len(), nodes.len(), "one value per node required");
    let mut max_rel = 0.0f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut excluded = 0usize;
    for (i, &value) in solution.iter().enumerate() {
        if nodes.is_boundary(i) {
            continue;
        }
        let exact = analytic_u(nodes.point(i));
        if exact.abs() < RELATIVE_ERROR_FLOOR {
            excluded += 1;
            continue;
        }
        let rel = ((exact - value) / exact).abs();
        max_rel = max_rel.max(rel);
        sum += rel;
        count += 1;
    }
    ErrorReport {
        max_rel,
        mean_rel: if count > 0 { sum / count as f64 } else { 0.0 },
        interior_count: count,
        excluded,
    }
}

/// Median phase times in milliseconds.
#[derive(Clone, Copy, Debug)]
pub struct TimingReport {
    pub phase1_ms: f64,
    pub phase2_ms: f64,
    pub repeats: usize,
}

/// Everything a single run produces.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub errors: ErrorReport,
    pub timing: TimingReport,
    pub solve: SolveReport,
}

/// Weight rows produced by phase 1.
pub enum WeightRows {
    RbfFd(Vec<OperatorWeights>),
    Hybrid(Vec<HybridWeights>),
}

impl WeightRows {
    pub fn len(&self) -> usize {
        match self {
            WeightRows::RbfFd(rows) => rows.len(),
            WeightRows::Hybrid(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Phase 1 for one configuration: stencil search plus weight rows.
pub fn build_rows(cfg: &ExperimentConfig, nodes: &NodeSet) -> Result<WeightRows> {
    let rbf = cfg.rbf_config()?;
    match (cfg.method.stencil_kind(), cfg.method.variant()) {
        (None, _) => Ok(WeightRows::RbfFd(assemble_all_weights(
            nodes,
            &rbf,
            Operator::Laplacian,
        )?)),
        (Some(kind), Some(variant)) => {
            let vs = make_virtual_stencil(kind, cfg.sigma, cfg.h)?;
            Ok(WeightRows::Hybrid(assemble_all_hybrid(
                nodes, &rbf, &vs, variant,
            )?))
        }
        _ => unreachable!(),
    }
}

/// Assembles the global Poisson system for one configuration (untimed path,
/// used for matrix export).
pub fn assemble_poisson(cfg: &ExperimentConfig, nodes: &NodeSet) -> Result<SparseSystem> {
    match build_rows(cfg, nodes)? {
        WeightRows::RbfFd(rows) => assemble_system(nodes, &rows, analytic_f),
        WeightRows::Hybrid(rows) => assemble_system(nodes, &rows, analytic_f),
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Runs one experiment on a freshly generated node set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let nodes = NodeSet::generate(cfg.h, cfg.seed)?;
    run_experiment_on(cfg, &nodes)
}

/// Runs one experiment on an existing node set (sweeps reuse the set across
/// configurations; the result is identical to [`run_experiment`] because
/// generation is deterministic).
pub fn run_experiment_on(cfg: &ExperimentConfig, nodes: &NodeSet) -> Result<ExperimentOutcome> {
    cfg.validate()?;

    let mut rows = build_rows(cfg, nodes)?; // warm-up
    let mut phase1 = Vec::with_capacity(cfg.repeats);
    for _ in 0..cfg.repeats {
        let start = Instant::now();
        rows = build_rows(cfg, nodes)?;
        phase1.push(start.elapsed().as_secs_f64() * 1e3);
    }

    let sys = match &rows {
        WeightRows::RbfFd(rows) => assemble_system(nodes, rows, analytic_f)?,
        WeightRows::Hybrid(rows) => assemble_system(nodes, rows, analytic_f)?,
    };

    let mut report = solve_bicgstab_ilut(&sys, &cfg.solver)?; // warm-up
    let mut phase2 = Vec::with_capacity(cfg.repeats);
    for _ in 0..cfg.repeats {
        let start = Instant::now();
        report = solve_bicgstab_ilut(&sys, &cfg.solver)?;
        phase2.push(start.elapsed().as_secs_f64() * 1e3);
    }

    let errors = compute_errors(nodes, &report.solution);
    Ok(ExperimentOutcome {
        errors,
        timing: TimingReport {
            phase1_ms: median(&mut phase1),
            phase2_ms: median(&mut phase2),
            repeats: cfg.repeats,
        },
        solve: report,
    })
}

/// One emitted benchmark row. `outcome` is `None` when the run failed with a
/// numeric error (solver breakdown or an ill-conditioned stencil); such rows
/// are kept in the output as non-converged.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub method: Method,
    pub degree: u32,
    pub stencil_size: usize,
    pub sigma: f64,
    pub h: f64,
    pub seed: u64,
    pub outcome: Option<ExperimentOutcome>,
}

impl SweepRow {
    pub fn from_run(cfg: &ExperimentConfig, outcome: Option<ExperimentOutcome>) -> Result<SweepRow> {
        Ok(SweepRow {
            method: cfg.method,
            degree: cfg.degree,
            stencil_size: cfg.rbf_config()?.stencil_size(),
            sigma: cfg.sigma,
            h: cfg.h,
            seed: cfg.seed,
            outcome,
        })
    }
}

/// Default sigma grid: 40 log-spaced values spanning `[1e-2, 10]`, wide
/// enough to show both divergence regimes around the sweet spot.
pub fn default_sigma_grid() -> Vec<f64> {
    let (lo, hi, count) = (1e-2f64, 10.0f64, 40);
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Runs `base` once per sigma, reusing one node set. Numeric failures are
/// recorded as non-converged rows; configuration errors abort.
pub fn run_sigma_sweep(base: &ExperimentConfig, sigmas: &[f64]) -> Result<Vec<SweepRow>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidParameter("empty sigma list".into()));
    }
    if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "sigma values must be positive, got {bad}"
        )));
    }
    let nodes = NodeSet::generate(base.h, base.seed)?;
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let cfg = ExperimentConfig { sigma, ..*base };
        let outcome = match run_experiment_on(&cfg, &nodes) {
            Ok(outcome) => Some(outcome),
            Err(e) if e.is_numeric() => None,
            Err(fatal) => return Err(fatal),
        };
        rows.push(SweepRow::from_run(&cfg, outcome)?);
    }
    Ok(rows)
}

/// CSV schema emitted by the harness.
pub const CSV_HEADER: &str =
    "method,m,n,sigma,h,seed,mean_rel,max_rel,iterations,converged,phase1_ms,phase2_ms";

/// Writes benchmark rows as CSV. All columns except the two timing columns
/// are byte-for-byte deterministic for a fixed configuration.
pub fn write_csv<W: Write>(rows: &[SweepRow], w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "# mean_rel divides by the interior node count; boundary nodes are excluded"
    )?;
    writeln!(
        w,
        "# phase1 = stencil search + weight rows; phase2 = iterative solve; node generation and assembly untimed"
    )?;
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        let (mean_rel, max_rel, iterations, converged, p1, p2) = match &row.outcome {
            Some(out) => (
                out.errors.mean_rel,
                out.errors.max_rel,
                out.solve.iterations,
                out.solve.converged,
                out.timing.phase1_ms,
                out.timing.phase2_ms,
            ),
            None => (f64::NAN, f64::NAN, 0, false, f64::NAN, f64::NAN),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.method,
            row.degree,
            row.stencil_size,
            row.sigma,
            row.h,
            row.seed,
            mean_rel,
            max_rel,
            iterations,
            converged,
            p1,
            p2
        )?;
    }
    Ok(())
}

/// Parses a key-value configuration file: one `key = value` pair per line,
/// `#` starts a comment, blank lines ignored.
pub fn parse_key_values(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!(
                "line {}: empty key or value",
                lineno + 1
            )));
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}
