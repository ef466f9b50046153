//! Self-checks behind `solve validate`.

use minimax_core::benchmarks::{self, BenchmarkProblem, BENCHMARK_IDS, SAMPLE_BOX};
use minimax_core::scalarization::binomial;
use minimax_core::{build_tchebycheff, das_dennis, solve_sp, SubproblemInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, RunConfig};

pub const GRADIENT_POINTS: usize = 200;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-6;
pub const ORACLE_INSTANCES: usize = 200;
pub const GRID_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub problems: Vec<String>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn sample(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..=half)).collect()
}

pub fn run_checks(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let seed = cfg.seed.unwrap_or(0);
    let problems: Vec<BenchmarkProblem> = match cfg.benchmark()? {
        Some(p) => vec![p],
        None => BENCHMARK_IDS
            .iter()
            .map(|id| benchmarks::by_id(id, if *id == "ex52" { cfg.n } else { None }))
            .collect::<Result<_, _>>()?,
    };

    let mut checks = Vec::new();
    for p in &problems {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        checks.push(gradient_check(p, &mut rng));
        checks.push(tchebycheff_gradient_check(p, cfg, &mut rng)?);
        checks.push(pareto_oracle_check(p, &mut rng)?);
    }
    checks.push(subproblem_oracle_check(&mut ChaCha8Rng::seed_from_u64(seed))?);
    checks.push(das_dennis_check()?);

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        problems: problems.iter().map(|p| p.id.clone()).collect(),
        seed,
        checks,
        passed,
    })
}

/// Largest deviation between analytic and central-difference gradients.
pub fn gradient_check(p: &BenchmarkProblem, rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    let mut failure = None;
    for _ in 0..GRADIENT_POINTS {
        let x = sample(rng, p.dimension(), SAMPLE_BOX);
        match p.bundle.check_gradients(&x, FD_STEP) {
            Ok(errs) => worst = errs.iter().fold(worst, |m, e| m.max(*e)),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    Check {
        name: format!("gradients/{}", p.id),
        passed: failure.is_none() && worst <= GRADIENT_TOL,
        detail: json!({ "points": GRADIENT_POINTS, "maxError": worst, "tolerance": GRADIENT_TOL, "error": failure }),
    }
}

pub fn tchebycheff_gradient_check(
    p: &BenchmarkProblem,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Check, CliError> {
    let m = p.objectives();
    let refs = das_dennis(m, cfg.partitions())?;
    let v = vec![0.0; m];
    let mut worst = 0.0f64;
    let mut failure = None;
    let per_ref = GRADIENT_POINTS.div_ceil(refs.len());
    for r in &refs {
        let bundle = build_tchebycheff(&p.bundle, &v, r, cfg.d_min)?;
        for _ in 0..per_ref {
            let x = sample(rng, p.dimension(), SAMPLE_BOX);
            match bundle.check_gradients(&x, FD_STEP) {
                Ok(errs) => worst = errs.iter().fold(worst, |m, e| m.max(*e)),
                Err(e) => failure = Some(e.to_string()),
            }
        }
    }
    Ok(Check {
        name: format!("tchebycheffGradients/{}", p.id),
        passed: failure.is_none() && worst <= GRADIENT_TOL,
        detail: json!({ "references": refs.len(), "pointsPerReference": per_ref, "maxError": worst, "error": failure }),
    })
}

/// Points with a known answer: individual minimizers, the ex51 midpoint that
/// is not stationary, and the ex52 segment.
pub fn pareto_oracle_check(p: &BenchmarkProblem, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let n = p.dimension();
    let mut cases: Vec<(Vec<f64>, bool)> = Vec::new();
    match p.id.as_str() {
        "ex51" | "ex51-corrupt" => {
            cases.push((vec![0.0, 4.5], true));
            cases.push((vec![4.5, 0.0], true));
            cases.push((vec![2.25, 2.25], false));
        }
        "ex53" => {
            cases.push((vec![0.0, 0.0], true));
            cases.push((vec![1.0, 1.0], false));
        }
        _ => {
            let a = 1.0 / n as f64;
            for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                cases.push((vec![s * a; n], true));
            }
            cases.push((vec![2.0 * a; n], false));
        }
    }

    let mut mismatches = Vec::new();
    for (x, expected) in &cases {
        let (stationary, residual) = p.pareto_stationary_check(x, 1e-6)?;
        if stationary != *expected || p.pareto_oracle(x, 1e-4)? != *expected {
            mismatches.push(json!({ "theta": x, "expected": expected, "residual": residual }));
        }
    }
    // Residual certificate and oracle must agree on random points as well.
    let mut disagreements = 0;
    for _ in 0..200 {
        let x = sample(rng, n, 1.0);
        if p.pareto_stationary_check(&x, 1e-6)?.0 != p.pareto_oracle(&x, 1e-4)? {
            disagreements += 1;
        }
    }
    Ok(Check {
        name: format!("paretoOracle/{}", p.id),
        passed: mismatches.is_empty() && disagreements == 0,
        detail: json!({ "knownPoints": cases.len(), "mismatches": mismatches, "randomDisagreements": disagreements }),
    })
}

/// Minimizer of the two-gradient dual over a uniform grid on `[0, 1]`.
pub fn grid_dual(a: &[f64], b: &[f64], ca: f64, cb: f64, step: f64) -> f64 {
    let steps = (1.0 / step).round() as usize;
    let phi = |t: f64| {
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (t * x + (1.0 - t) * y).powi(2)).sum();
        0.5 * sq - t * ca - (1.0 - t) * cb
    };
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let v = phi(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    best.1
}

pub fn subproblem_oracle_check(rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let mut worst_dual = 0.0f64;
    let mut worst_gap = 0.0f64;
    for _ in 0..ORACLE_INSTANCES {
        let a = sample(rng, 2, 5.0);
        let b = sample(rng, 2, 5.0);
        let c = sample(rng, 2, 5.0);
        let input = SubproblemInput::new(vec![a.clone(), b.clone()], c.clone(), vec![0, 1])?;
        let sol = solve_sp(&input, 1e-12, 10_000, None)?;
        let t = grid_dual(&a, &b, c[0], c[1], GRID_STEP);
        worst_dual = worst_dual.max((sol.duals[0] - t).abs());
        let dual_obj = sol.duals[0] * c[0] + sol.duals[1] * c[1] - 0.5 * sol.norm_p().powi(2);
        worst_gap = worst_gap.max((sol.primal_objective() - dual_obj).abs());
    }
    Ok(Check {
        name: "subproblemOracle".into(),
        passed: worst_dual <= 1e-4 && worst_gap <= 1e-8,
        detail: json!({ "instances": ORACLE_INSTANCES, "gridStep": GRID_STEP, "maxDualError": worst_dual, "maxObjectiveGap": worst_gap }),
    })
}

pub fn das_dennis_check() -> Result<Check, CliError> {
    let mut failures = Vec::new();
    for m in 2..=5usize {
        for h in 1..=12usize {
            let got = das_dennis(m, h)?.len() as u128;
            let want = binomial((h + m - 1) as u64, (m - 1) as u64);
            if got != want {
                failures.push(json!({ "m": m, "H": h, "count": got as u64, "expected": want as u64 }));
            }
        }
    }
    Ok(Check {
        name: "dasDennisCounts".into(),
        passed: failures.is_empty(),
        detail: json!({ "failures": failures }),
    })
}
