//! Two-objective test problems with analytic gradients and ground-truth
//! Pareto-stationarity oracles.
//!
//! | id     | objectives                                                  | class              |
//! |--------|-------------------------------------------------------------|--------------------|
//! | `ex51` | `x1²/25 + (x2-4.5)²/100`, `x2²/25 + (x1-4.5)²/100`           | convex             |
//! | `ex52` | `1 - exp(-|x - a|²)`, `1 - exp(-|x + a|²)`, `a = (1/n)·1`    | nonconvex          |
//! | `ex53` | `1/(x1²+x2²+1)`, `x1² + 3x2² + 1`                            | mixed-pseudoconvex |

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{dot, Component, FnComponent, ObjectiveBundle};
use crate::subproblem::{solve_sp, SubproblemInput, DEFAULT_SP_MAX_ITER, DEFAULT_SP_TOL};

pub const DEFAULT_EX52_DIM: usize = 20;

/// Side length of the box `[-BOX, BOX]^n` used for random sampling.
pub const SAMPLE_BOX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityClass {
    Convex,
    Nonconvex,
    MixedPseudoconvex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Oracle {
    /// Min-norm Jacobian combination below the tolerance.
    Residual,
    /// Infinity-norm distance to `{s·a : s in [-1, 1]}` with `a = (h, ..., h)`.
    Segment { half_width: f64 },
}

#[derive(Clone)]
pub struct BenchmarkProblem {
    pub id: String,
    pub bundle: ObjectiveBundle,
    pub convexity: ConvexityClass,
    oracle: Oracle,
    start_box: f64,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("id", &self.id)
            .field("dimension", &self.dimension())
            .field("convexity", &self.convexity)
            .finish()
    }
}

impl BenchmarkProblem {
    pub fn dimension(&self) -> usize {
        self.bundle.dim()
    }

    pub fn objectives(&self) -> usize {
        self.bundle.len()
    }

    /// Half-width of the box that random starting points are drawn from.
    ///
    /// [`SAMPLE_BOX`] except for `ex52`, whose objectives are flat to machine
    /// precision a few units from the origin; there it is `1/sqrt(n)`.
    pub fn start_box(&self) -> f64 {
        self.start_box
    }

    /// Membership in the analytically derived Pareto-stationary set.
    pub fn pareto_oracle(&self, x: &[f64], tol: f64) -> Result<bool> {
        match self.oracle {
            Oracle::Residual => Ok(self.pareto_stationary_check(x, tol)?.0),
            Oracle::Segment { half_width } => Ok(segment_distance(x, half_width) <= tol),
        }
    }

    /// `(residual <= tol, residual)` with the residual taken over all objectives.
    pub fn pareto_stationary_check(&self, x: &[f64], tol: f64) -> Result<(bool, f64)> {
        if !(tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        let r = pareto_residual(&self.bundle, x)?;
        Ok((r <= tol, r))
    }
}

/// `min_{u in simplex} |sum_i u_i grad g_i(x)|` over every component.
///
/// Unlike the active-set residual of the minimax solver this does not depend
/// on any margin: it certifies Pareto criticality of the vector problem.
pub fn pareto_residual(bundle: &ObjectiveBundle, x: &[f64]) -> Result<f64> {
    let gradients = (0..bundle.len())
        .map(|i| bundle.gradient(i, x))
        .collect::<Result<Vec<_>>>()?;
    let input = SubproblemInput::min_norm(gradients, (0..bundle.len()).collect())?;
    Ok(solve_sp(&input, DEFAULT_SP_TOL, DEFAULT_SP_MAX_ITER, None)?.norm_p())
}

/// Infinity-norm distance from `x` to the segment between `-a` and `a`,
/// `a = (h, ..., h)`.
pub fn segment_distance(x: &[f64], h: f64) -> f64 {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let t = (0.5 * (hi + lo)).clamp(-h, h);
    (hi - t).max(t - lo)
}

fn arc<C: Component + 'static>(c: C) -> Arc<dyn Component> {
    Arc::new(c)
}

pub fn ex51() -> BenchmarkProblem {
    let g1 = FnComponent::new(
        |x: &[f64]| x[0] * x[0] / 25.0 + (x[1] - 4.5) * (x[1] - 4.5) / 100.0,
        |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0] / 25.0;
            g[1] = (x[1] - 4.5) / 50.0;
        },
    );
    let g2 = FnComponent::new(
        |x: &[f64]| x[1] * x[1] / 25.0 + (x[0] - 4.5) * (x[0] - 4.5) / 100.0,
        |x: &[f64], g: &mut [f64]| {
            g[0] = (x[0] - 4.5) / 50.0;
            g[1] = 2.0 * x[1] / 25.0;
        },
    );
    BenchmarkProblem {
        id: "ex51".into(),
        bundle: ObjectiveBundle::new(2, vec![arc(g1), arc(g2)]).expect("static bundle"),
        convexity: ConvexityClass::Convex,
        oracle: Oracle::Residual,
        start_box: SAMPLE_BOX,
    }
}

fn shifted_exp(n: usize, sign: f64) -> impl Component {
    let a = sign / n as f64;
    FnComponent::new(
        move |x: &[f64]| {
            let d: f64 = x.iter().map(|v| (v - a) * (v - a)).sum();
            -(-d).exp_m1()
        },
        move |x: &[f64], g: &mut [f64]| {
            let d: f64 = x.iter().map(|v| (v - a) * (v - a)).sum();
            let w = 2.0 * (-d).exp();
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi = w * (xi - a);
            }
        },
    )
}

pub fn ex52(n: usize) -> Result<BenchmarkProblem> {
    if n < 1 {
        return Err(Error::param("n", "dimension must be at least 1"));
    }
    Ok(BenchmarkProblem {
        id: "ex52".into(),
        bundle: ObjectiveBundle::new(n, vec![arc(shifted_exp(n, 1.0)), arc(shifted_exp(n, -1.0))])?,
        convexity: ConvexityClass::Nonconvex,
        start_box: 1.0 / (n as f64).sqrt(),
        oracle: Oracle::Segment {
            half_width: 1.0 / n as f64,
        },
    })
}

pub fn ex53() -> BenchmarkProblem {
    let g1 = FnComponent::new(
        |x: &[f64]| 1.0 / (dot(x, x) + 1.0),
        |x: &[f64], g: &mut [f64]| {
            let s = dot(x, x) + 1.0;
            let w = -2.0 / (s * s);
            g[0] = w * x[0];
            g[1] = w * x[1];
        },
    );
    let g2 = FnComponent::new(
        |x: &[f64]| x[0] * x[0] + 3.0 * x[1] * x[1] + 1.0,
        |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            g[1] = 6.0 * x[1];
        },
    );
    BenchmarkProblem {
        id: "ex53".into(),
        bundle: ObjectiveBundle::new(2, vec![arc(g1), arc(g2)]).expect("static bundle"),
        convexity: ConvexityClass::MixedPseudoconvex,
        oracle: Oracle::Residual,
        start_box: SAMPLE_BOX,
    }
}

/// `ex51` with the first gradient entry of `g_1` off by one. Used to exercise
/// failing gradient checks.
pub fn corrupted_gradient_fixture() -> BenchmarkProblem {
    let base = ex51();
    let g1 = base.bundle.component(0).clone();
    let g1_bad = {
        let g1v = g1.clone();
        FnComponent::new(
            move |x: &[f64]| g1v.value(x),
            move |x: &[f64], g: &mut [f64]| {
                g1.gradient(x, g);
                g[0] += 1.0;
            },
        )
    };
    BenchmarkProblem {
        id: "ex51-corrupt".into(),
        bundle: ObjectiveBundle::new(2, vec![arc(g1_bad), base.bundle.component(1).clone()]).expect("static bundle"),
        ..base
    }
}

/// Problem registry. `n` only applies to `ex52` (default 20).
pub fn by_id(id: &str, n: Option<usize>) -> Result<BenchmarkProblem> {
    match id {
        "ex51" => Ok(ex51()),
        "ex52" => ex52(n.unwrap_or(DEFAULT_EX52_DIM)),
        "ex53" => Ok(ex53()),
        "ex51-corrupt" => Ok(corrupted_gradient_fixture()),
        other => Err(Error::param("problem", format!("unknown problem id `{other}`"))),
    }
}

pub const BENCHMARK_IDS: [&str; 3] = ["ex51", "ex52", "ex53"];
