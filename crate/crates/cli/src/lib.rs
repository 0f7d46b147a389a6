//! Batch front end: reads a TOML run configuration, runs one stage of the
//! solver/audit pipeline and writes an artifact bundle.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use divlab_core::eval::divergence;
use divlab_core::lemmas::{audit_all, check_h2_stokes, fit_constants};
use divlab_core::norms::{certify_radius, rho_norm};
use divlab_core::pipeline::{build_report_tables, report_from_tables, ReportTables};
use divlab_core::{AnalyticDomain, DivergenceSolution, JetField, KomatsuFamily, NormWeights, Point};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bundle::Bundle;
pub use crate::config::RunConfig;

/// Letters in the tangential family of a planar domain.
const LETTERS: u64 = 3;
/// Word length from which table builds need `--force`.
const LONG_WORDS: usize = 9;
/// Interior points for the seeded divergence spot check.
const SPOT_CHECKS: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("refusing to run: {0}")]
    Refused(String),
    #[error(transparent)]
    Core(#[from] divlab_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems (including inadmissible problem data),
    /// 3 for numerical failures, 4 for residuals over tolerance.
    pub fn exit_code(&self) -> u8 {
        use divlab_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Refused(_) => 2,
            CliError::Core(E::ToleranceViolation { .. }) => 4,
            CliError::Core(
                E::NonzeroMean { .. } | E::NotStarShaped(_) | E::DegenerateBoundary { .. } | E::InvalidInput(_),
            ) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "divlab", version, about = "Solve div u = f with zero boundary values and audit the analytic norms of u")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Solve,
    Table,
    Certify,
    Lemmas,
    Bootstrap,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and check residuals.
    Solve(RunArgs),
    /// Solve and export the derivative tables.
    Table(RunArgs),
    /// Tail-ratio certification of the analytic norm of u.
    Certify(RunArgs),
    /// Inequality audits and fitted constants.
    Lemmas(RunArgs),
    /// Absorption sums over the ε₂ grid.
    Bootstrap(RunArgs),
    /// Everything above in one bundle.
    Report(RunArgs),
}

impl Command {
    pub fn split(&self) -> (Stage, &RunArgs) {
        match self {
            Command::Solve(a) => (Stage::Solve, a),
            Command::Table(a) => (Stage::Table, a),
            Command::Certify(a) => (Stage::Certify, a),
            Command::Lemmas(a) => (Stage::Lemmas, a),
            Command::Bootstrap(a) => (Stage::Bootstrap, a),
            Command::Report(a) => (Stage::Report, a),
        }
    }
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::Table => "table",
            Stage::Certify => "certify",
            Stage::Lemmas => "lemmas",
            Stage::Bootstrap => "bootstrap",
            Stage::Report => "report",
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Bundle directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run even when the word count is very large.
    #[arg(long)]
    pub force: bool,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

/// Runs one stage and returns the bundle directory.
pub fn run(stage: Stage, args: &RunArgs) -> Result<PathBuf, CliError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", args.config.display())),
        other => other,
    })?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if stage != Stage::Solve {
        guard_word_count(cfg.orders.j_max, cfg.longest_word(), args.force)?;
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // Only fails if a global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("divlab-out"));
    let mut bundle = Bundle::create(&dir)?;
    bundle.write("config.toml", text.as_bytes())?;

    let domain = AnalyticDomain::new(&cfg.domain)?;
    let f = cfg.source_poly();
    let sol = divlab_core::pipeline::solve_divergence(&domain, &f, &cfg.solver_options())?;
    let mut summary = residual_summary(stage, &cfg, &domain, &sol)?;
    bundle.write_json("reports/solution.json", &SolutionReport::new(&cfg, &sol))?;

    if stage != Stage::Solve {
        let opts = cfg.report_options();
        let family = KomatsuFamily::build(&domain)?;
        let quad = domain.volume_quadrature(opts.quad_radial, opts.quad_angular)?;
        let tables = build_report_tables(&sol, &family, &quad, &opts)?;
        write_tables(&mut bundle, &tables)?;
        let w = NormWeights::new(opts.eps1, opts.eps2, opts.m)?;
        match stage {
            Stage::Solve | Stage::Table => {
                writeln!(summary, "tables: {} written to tables/", tables.all().len()).unwrap();
            }
            Stage::Certify => {
                let rho_u = rho_norm(&tables.u, &w)?;
                let rho_f = rho_norm(&tables.f, &w)?;
                let cert = certify_radius(&tables.u, &opts.grid)?;
                summarize_certification(&mut summary, rho_u.total, rho_f.total, &cert);
                bundle.write_json(
                    "reports/certification.json",
                    &CertifyReport {
                        rho_u: &rho_u,
                        rho_f: &rho_f,
                        certification: &cert,
                    },
                )?;
            }
            Stage::Lemmas => {
                let mut audits = audit_all(&tables.audit(), &opts.sweep)?;
                audits.push(check_h2_stokes(&sol.stokes.velocity(), &sol.stokes.pressure(), &family, &quad)?);
                audits.sort_by_key(|r| (r.lemma, r.i, r.j));
                let constants = fit_constants(&audits);
                summarize_constants(&mut summary, &constants, audits.len());
                bundle.write_json(
                    "reports/lemmas.json",
                    &LemmaReport {
                        audits: &audits,
                        constants: &constants,
                    },
                )?;
            }
            Stage::Bootstrap => {
                let report = report_from_tables(tables, &opts, Some((&sol, &family, &quad)))?;
                summarize_bootstrap(&mut summary, &report);
                bundle.write_json(
                    "reports/bootstrap.json",
                    &BootstrapOut {
                        c_star: report.c_star(),
                        k_star: report.k_star(),
                        bootstrap: &report.bootstrap,
                        sweep: &report.bootstrap_sweep,
                    },
                )?;
            }
            Stage::Report => {
                let report = report_from_tables(tables, &opts, Some((&sol, &family, &quad)))?;
                let total = report.audits.len();
                summarize_certification(&mut summary, report.rho_u.total, report.rho_f.total, &report.certification);
                writeln!(summary, "psi(v, q): {:.6e}", report.psi.total).unwrap();
                summarize_constants(&mut summary, &report.constants, total);
                summarize_bootstrap(&mut summary, &report);
                bundle.write_json("reports/report.json", &report)?;
            }
        }
    }
    bundle.write("summary.txt", summary.as_bytes())?;
    bundle.finish(stage.name(), text.as_bytes(), cfg.seed, started.elapsed().as_secs_f64())?;
    Ok(dir)
}

fn guard_word_count(j_max: usize, longest: usize, force: bool) -> Result<(), CliError> {
    if longest < LONG_WORDS || force {
        return Ok(());
    }
    let words = |l: usize| LETTERS.pow(l as u32);
    Err(CliError::Refused(format!(
        "the audits at J_max = {j_max} walk {} words (3^{j_max}) per normal order and the tables walk words up to \
         length {longest} ({} at the top length); pass --force to run anyway",
        words(j_max),
        words(longest)
    )))
}

#[derive(Serialize)]
struct SolutionReport<'a> {
    domain: &'a divlab_core::DomainSpec,
    source: &'a [(usize, usize, f64)],
    options: divlab_core::SolverOptions,
    residuals: &'a divlab_core::pipeline::ResidualSummary,
    poisson_charges: usize,
    stokeslets: usize,
}

impl<'a> SolutionReport<'a> {
    fn new(cfg: &'a RunConfig, sol: &'a DivergenceSolution) -> Self {
        Self {
            domain: &cfg.domain,
            source: &cfg.source.terms,
            options: cfg.solver_options(),
            residuals: &sol.residuals,
            poisson_charges: sol.phi.charges().len(),
            stokeslets: sol.stokes.sources.len(),
        }
    }
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    rho_u: &'a divlab_core::norms::RhoNorm,
    rho_f: &'a divlab_core::norms::RhoNorm,
    certification: &'a divlab_core::norms::Certification,
}

#[derive(Serialize)]
struct LemmaReport<'a> {
    audits: &'a [divlab_core::lemmas::InequalityReport],
    constants: &'a [divlab_core::lemmas::FittedConstant],
}

#[derive(Serialize)]
struct BootstrapOut<'a> {
    c_star: f64,
    k_star: f64,
    bootstrap: &'a divlab_core::lemmas::BootstrapReport,
    sweep: &'a divlab_core::lemmas::BootstrapSweep,
}

fn write_tables(bundle: &mut Bundle, tables: &ReportTables) -> Result<(), CliError> {
    for t in tables.all() {
        bundle.write(&format!("tables/{}.csv", t.subject), t.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Uniform interior points drawn from the configured seed.
fn spot_points(domain: &AnalyticDomain, seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = domain.center();
    let r = domain.circumradius();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [c[0] + rng.random_range(-r..r), c[1] + rng.random_range(-r..r)];
        if domain.contains(p) {
            out.push(p);
        }
    }
    out
}

fn residual_summary(
    stage: Stage,
    cfg: &RunConfig,
    domain: &AnalyticDomain,
    sol: &DivergenceSolution,
) -> Result<String, CliError> {
    let r = &sol.residuals;
    let velocity = sol.velocity();
    let mut spot: f64 = 0.0;
    for p in spot_points(domain, cfg.seed, SPOT_CHECKS) {
        let div = divergence(&velocity.jets(p, 1)?)?.value();
        spot = spot.max((div - sol.f.eval(p)).abs());
    }
    let rel = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let mut s = String::new();
    writeln!(s, "divlab {} (core {})", stage.name(), divlab_core::VERSION).unwrap();
    writeln!(s, "domain: {}", serde_json::to_string(&cfg.domain).expect("domain serializes")).unwrap();
    writeln!(s, "source terms: {}", cfg.source.terms.len()).unwrap();
    writeln!(s, "mean of f: {:.6e}", r.mean_f).unwrap();
    writeln!(s, "poisson boundary residual: max {:.6e}, l2 {:.6e}", r.poisson.max, r.poisson.l2).unwrap();
    writeln!(s, "stokes boundary residual: max {:.6e}, l2 {:.6e}", r.stokes.max, r.stokes.l2).unwrap();
    writeln!(s, "boundary flux of grad phi: {:.6e}", r.flux).unwrap();
    writeln!(
        s,
        "divergence residual: {:.6e} (relative {:.6e})",
        r.divergence,
        rel(r.divergence, r.f_norm)
    )
    .unwrap();
    writeln!(
        s,
        "boundary residual: {:.6e} (relative {:.6e})",
        r.boundary_max,
        rel(r.boundary_max, r.data_scale)
    )
    .unwrap();
    writeln!(s, "spot check max |div u - f| at {SPOT_CHECKS} points: {spot:.6e}").unwrap();
    Ok(s)
}

fn summarize_certification(s: &mut String, rho_u: f64, rho_f: f64, cert: &divlab_core::norms::Certification) {
    writeln!(s, "rho(u): {rho_u:.6e}").unwrap();
    writeln!(s, "rho(f): {rho_f:.6e}").unwrap();
    if rho_f > 0.0 {
        writeln!(s, "rho(u) / rho(f): {:.6e}", rho_u / rho_f).unwrap();
    }
    match cert.best {
        Some((e1, e2)) => writeln!(s, "certified weights: eps1 {e1:.6e}, eps2 {e2:.6e}").unwrap(),
        None => writeln!(s, "certified weights: none").unwrap(),
    }
}

fn summarize_constants(s: &mut String, constants: &[divlab_core::lemmas::FittedConstant], audits: usize) {
    writeln!(s, "audits: {audits}").unwrap();
    for c in constants {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        writeln!(
            s,
            "{}: C* {}, K* {}, cases {}, degenerate {}",
            c.lemma.name(),
            fmt(c.c_star),
            fmt(c.k_star),
            c.cases,
            c.degenerate
        )
        .unwrap();
    }
}

fn summarize_bootstrap(s: &mut String, report: &divlab_core::FullReport) {
    let sweep = &report.bootstrap_sweep;
    writeln!(s, "bootstrap C*: {:.6e}, K*: {:.6e}", sweep.c_star, sweep.k_star).unwrap();
    let absorbed = sweep.reports.iter().filter(|b| b.absorbed()).count();
    writeln!(s, "bootstrap absorbed at {absorbed} of {} grid points", sweep.reports.len()).unwrap();
    match sweep.best_eps2 {
        Some(e) => writeln!(s, "largest absorbed eps2: {e:.6e}").unwrap(),
        None => writeln!(s, "largest absorbed eps2: none").unwrap(),
    }
}

/// Writes the error to stderr and maps it to an exit status.
pub fn report_error(err: &CliError) -> u8 {
    eprintln!("divlab: {err}");
    err.exit_code()
}
