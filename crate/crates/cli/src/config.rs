use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use minimax_core::benchmarks::{self, BenchmarkProblem};
use minimax_core::{DScaling, DecisionPoint, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Minimax,
    Mop,
    GenRefs,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a run needs. Loaded from an optional JSON file, then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Benchmark id; `validate` without a problem checks all benchmarks.
    pub problem: Option<String>,
    /// Dimension for `ex52`.
    pub n: Option<usize>,
    pub solver: SolverConfig,
    /// Das-Dennis partition count.
    #[serde(rename = "H")]
    pub h: Option<usize>,
    /// Objective count for `gen-refs` without a problem.
    pub m: Option<usize>,
    pub theta0: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Translation vector, zero when absent.
    pub v: Option<Vec<f64>>,
    pub d_min: f64,
    pub d_scaling: DScaling,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    /// Worker threads for `mop`; 0 uses every available core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::default(),
            problem: None,
            n: None,
            solver: SolverConfig::default(),
            h: None,
            m: None,
            theta0: None,
            seed: None,
            v: None,
            d_min: minimax_core::scalarization::DEFAULT_D_MIN,
            d_scaling: DScaling::default(),
            out: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
            jobs: 0,
        }
    }
}

pub const DEFAULT_H: usize = 8;

fn bad(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {reason}"))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.solver.validate()?;
        if matches!(self.mode, Mode::Minimax | Mode::Mop) && self.problem.is_none() {
            return Err(bad("problem", "required for this mode"));
        }
        if self.mode == Mode::GenRefs && self.problem.is_none() && self.m.is_none() {
            return Err(bad("m", "gen-refs needs --m or --problem"));
        }
        if self.h == Some(0) {
            return Err(bad("H", "must be at least 1"));
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(bad("dMin", "must be positive"));
        }
        if self.theta0.is_some() && self.seed.is_some() {
            return Err(bad("theta0", "give either theta0 or seed, not both"));
        }
        if let Some(id) = &self.problem {
            if self.n.is_some() && id != "ex52" {
                return Err(bad("n", format!("problem {id} has a fixed dimension")));
            }
        }
        Ok(())
    }

    pub fn partitions(&self) -> usize {
        self.h.unwrap_or(DEFAULT_H)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn benchmark(&self) -> Result<Option<BenchmarkProblem>, CliError> {
        self.problem
            .as_deref()
            .map(|id| benchmarks::by_id(id, self.n).map_err(CliError::from))
            .transpose()
    }

    /// `theta0` if given, a seeded uniform draw from the problem's start box,
    /// or the all-ones vector.
    pub fn start(&self, problem: &BenchmarkProblem) -> Result<DecisionPoint, CliError> {
        let n = problem.dimension();
        match (&self.theta0, self.seed) {
            (Some(t), _) if t.len() != n => Err(bad("theta0", format!("expected {n} coordinates, got {}", t.len()))),
            (Some(t), _) => DecisionPoint::new(t.clone()).map_err(|e| bad("theta0", e)),
            (None, Some(seed)) => Ok(random_start(problem, seed)),
            (None, None) => Ok(DecisionPoint::filled(n, 1.0)?),
        }
    }
}

/// Uniform point in `[-b, b]^n` with `b = problem.start_box()`.
pub fn random_start(problem: &BenchmarkProblem, seed: u64) -> DecisionPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = problem.start_box();
    let coords = (0..problem.dimension()).map(|_| rng.gen_range(-b..=b)).collect();
    DecisionPoint::new(coords).expect("finite sample")
}

/// Command-line flags. Anything left unset falls back to the `--config` file
/// and then to the built-in defaults.
#[derive(Debug, Parser)]
#[command(
    name = "solve",
    version,
    about = "Minimax and multiobjective solver runs",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "H")]
    pub h: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub ptol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Comma-separated starting point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Option<Vec<f64>>,
    #[arg(long, conflicts_with = "theta0")]
    pub seed: Option<u64>,
    /// Comma-separated translation vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Option<Vec<f64>>,
    #[arg(long)]
    pub d_min: Option<f64>,
    /// `unit-min` or `as-given`.
    #[arg(long)]
    pub d_scaling: Option<DScaling>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| bad("config", e))?
            }
            None => RunConfig::default(),
        };
        cfg.mode = self.mode;
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            epsilon => solver.epsilon,
            sigma => solver.sigma,
            gamma => solver.gamma,
            alpha0 => solver.alpha0,
            delta => solver.delta,
            ptol => solver.p_tol,
            max_iter => solver.max_outer_iter,
            d_min => d_min,
            d_scaling => d_scaling,
            out => out,
            formats => formats,
            jobs => jobs,
        );
        if self.problem.is_some() {
            cfg.problem = self.problem;
        }
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.h.is_some() {
            cfg.h = self.h;
        }
        if self.m.is_some() {
            cfg.m = self.m;
        }
        if self.v.is_some() {
            cfg.v = self.v;
        }
        if self.theta0.is_some() {
            cfg.theta0 = self.theta0;
            cfg.seed = None;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
            cfg.theta0 = None;
        }
        Ok(cfg)
    }
}
