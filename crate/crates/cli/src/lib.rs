//! Library side of the `solve` binary: configuration handling and the four
//! run modes. Each `run_*` function writes its artifacts into the configured
//! output directory and returns the process exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (`pTol` termination, all checks passed) |
//! | 1 | bad configuration or I/O failure |
//! | 2 | iteration budget exhausted |
//! | 3 | divergence |
//! | 4 | a validation check failed |

pub mod config;
pub mod validate;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use minimax_core::benchmarks::pareto_residual;
use minimax_core::report::{plot_json, trace_json, write_front_csv, write_refs_csv, write_trace_csv};
use minimax_core::{
    das_dennis, non_dominated_filter, solve_front, solve_minimax, FrontOptions, FrontPoint, TerminationReason,
};
use serde_json::{json, Value};

pub use config::{random_start, Cli, Format, Mode, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("bad config: {0}")]
    Core(#[from] minimax_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

pub fn exit_code(reason: TerminationReason) -> i32 {
    match reason {
        TerminationReason::PTol => EXIT_OK,
        TerminationReason::MaxIter => EXIT_MAX_ITER,
        TerminationReason::Divergence => EXIT_DIVERGENCE,
    }
}

/// Parses `args` (including the program name), runs, and reports errors on
/// stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.into_config().and_then(|cfg| run(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Minimax => run_minimax(cfg),
        Mode::Mop => run_mop(cfg),
        Mode::GenRefs => run_gen_refs(cfg),
        Mode::Validate => run_validate(cfg),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io { path, source })
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| CliError::Io {
        path: dir.join(name),
        source,
    })
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    write_with(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io {
        path: cfg.out.clone(),
        source,
    })?;
    Ok(&cfg.out)
}

pub fn run_minimax(cfg: &RunConfig) -> Result<i32, CliError> {
    let problem = cfg.benchmark()?.expect("validated");
    let start = cfg.start(&problem)?;
    let (theta, trace) = solve_minimax(&problem.bundle, &start, &cfg.solver)?;
    let dir = out_dir(cfg)?;

    if cfg.wants(Format::Csv) {
        write_with(dir, "trace.csv", |w| write_trace_csv(&trace, w))?;
    }
    if cfg.wants(Format::Json) {
        write_json(dir, "trace.json", &trace_json(&trace))?;
    }
    let s = &trace.summary;
    let code = exit_code(s.termination);
    let summary = json!({
        "mode": cfg.mode,
        "problem": problem.id,
        "dimension": problem.dimension(),
        "config": cfg,
        "seed": cfg.seed,
        "theta0": start,
        "theta": theta,
        "objectives": problem.bundle.values(theta.as_slice()).ok(),
        "G": s.final_value,
        "stationarityResidual": s.final_stationarity_residual,
        "paretoResidual": pareto_residual(&problem.bundle, theta.as_slice()).ok(),
        "termination": s.termination,
        "iterations": s.iterations,
        "shrinkEvents": s.shrink_events,
        "exitCode": code,
    });
    write_json(dir, "summary.json", &summary)?;
    println!(
        "{}: {} after {} iterations, G = {:e}, residual = {:e}",
        problem.id, s.termination, s.iterations, s.final_value, s.final_stationarity_residual
    );
    Ok(code)
}

/// Worst outcome over the front: divergence, then budget exhaustion.
fn front_exit_code(points: &[FrontPoint]) -> i32 {
    points
        .iter()
        .map(|p| exit_code(p.termination))
        .fold(EXIT_OK, |worst, c| match (worst, c) {
            (EXIT_DIVERGENCE, _) | (_, EXIT_DIVERGENCE) => EXIT_DIVERGENCE,
            (EXIT_MAX_ITER, _) | (_, EXIT_MAX_ITER) => EXIT_MAX_ITER,
            _ => EXIT_OK,
        })
}

pub fn run_mop(cfg: &RunConfig) -> Result<i32, CliError> {
    let problem = cfg.benchmark()?.expect("validated");
    let m = problem.objectives();
    let start = cfg.start(&problem)?;
    let refs = das_dennis(m, cfg.partitions())?;
    let v = cfg.v.clone().unwrap_or_else(|| vec![0.0; m]);
    if v.len() != m {
        return Err(CliError::Config(format!("`v`: expected {m} entries, got {}", v.len())));
    }
    let opts = FrontOptions {
        d_min: cfg.d_min,
        d_scaling: cfg.d_scaling,
        jobs: cfg.jobs,
        keep_traces: false,
    };
    let points = solve_front(&problem.bundle, &v, &refs, &start, &cfg.solver, &opts)?;
    let filtered = non_dominated_filter(&points);
    let dir = out_dir(cfg)?;

    if cfg.wants(Format::Csv) {
        write_with(dir, "front_raw.csv", |w| write_front_csv(&points, w))?;
        write_with(dir, "front_filtered.csv", |w| write_front_csv(&filtered, w))?;
        write_with(dir, "refs.csv", |w| write_refs_csv(&refs, w))?;
    }
    if cfg.wants(Format::Json) {
        write_json(dir, "plotdata.json", &plot_json(&problem.id, &points, &filtered))?;
    }
    let code = front_exit_code(&points);
    let count = |r: TerminationReason| points.iter().filter(|p| p.termination == r).count();
    let summary = json!({
        "mode": cfg.mode,
        "problem": problem.id,
        "dimension": problem.dimension(),
        "config": cfg,
        "seed": cfg.seed,
        "theta0": start,
        "references": refs.len(),
        "nonDominated": filtered.len(),
        "terminations": {
            "pTol": count(TerminationReason::PTol),
            "maxIter": count(TerminationReason::MaxIter),
            "divergence": count(TerminationReason::Divergence),
        },
        "points": points,
        "exitCode": code,
    });
    write_json(dir, "summary.json", &summary)?;
    println!(
        "{}: {} reference vectors, {} non-dominated, {} terminated by pTol",
        problem.id,
        refs.len(),
        filtered.len(),
        count(TerminationReason::PTol)
    );
    Ok(code)
}

pub fn run_gen_refs(cfg: &RunConfig) -> Result<i32, CliError> {
    let m = match (cfg.m, cfg.benchmark()?) {
        (Some(m), _) => m,
        (None, Some(p)) => p.objectives(),
        (None, None) => unreachable!("validated"),
    };
    let refs = das_dennis(m, cfg.partitions())?;
    let dir = out_dir(cfg)?;
    if cfg.wants(Format::Csv) {
        write_with(dir, "refs.csv", |w| write_refs_csv(&refs, w))?;
    }
    if cfg.wants(Format::Json) {
        write_json(dir, "refs.json", &json!(refs))?;
    }
    println!("{} reference vectors (m = {m}, H = {})", refs.len(), cfg.partitions());
    Ok(EXIT_OK)
}

pub fn run_validate(cfg: &RunConfig) -> Result<i32, CliError> {
    let report = validate::run_checks(cfg)?;
    let dir = out_dir(cfg)?;
    write_json(
        dir,
        "validate.json",
        &serde_json::to_value(&report).expect("report serializes"),
    )?;
    for c in &report.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}
