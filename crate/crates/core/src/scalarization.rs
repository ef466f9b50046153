//! Reference-vector decomposition of a multiobjective problem.
//!
//! Every reference vector `u` turns the vector objective `g` into the weighted
//! Tchebycheff minimax problem `min_x max_j (g_j(x) - v_j) / d_j` with
//! `d_j = max(u_j, d_min)`, which is then solved by the minimax solver.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Component, DecisionPoint, ObjectiveBundle};
use crate::solver::{solve_minimax, IterationTrace, SolverConfig, TerminationReason};

pub const DEFAULT_D_MIN: f64 = 1e-3;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ReferenceVector(Vec<f64>);

impl ReferenceVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("reference", "empty weight vector"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param("reference", "weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::param("reference", format!("weights sum to {sum}, not 1")));
        }
        Ok(ReferenceVector(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Uniform weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "must be at least 1"));
        }
        Ok(ReferenceVector(vec![1.0 / m as f64; m]))
    }
}

impl TryFrom<Vec<f64>> for ReferenceVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ReferenceVector::new(v)
    }
}

impl From<ReferenceVector> for Vec<f64> {
    fn from(r: ReferenceVector) -> Self {
        r.0
    }
}

/// `C(n, k)` in `u128`; exact for the lattice sizes used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All weight vectors on the `m`-simplex with spacing `1/h`, in
/// lexicographic order. There are `C(h + m - 1, m - 1)` of them.
pub fn das_dennis(m: usize, h: usize) -> Result<Vec<ReferenceVector>> {
    if m < 2 {
        return Err(Error::param("m", "need at least two objectives"));
    }
    if h < 1 {
        return Err(Error::param("H", "need at least one partition"));
    }
    let mut out = Vec::with_capacity(binomial((h + m - 1) as u64, (m - 1) as u64) as usize);
    let mut counts = vec![0usize; m];
    fill_lattice(&mut counts, 0, h, h, &mut out);
    Ok(out)
}

fn fill_lattice(counts: &mut [usize], pos: usize, left: usize, h: usize, out: &mut Vec<ReferenceVector>) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        out.push(ReferenceVector(counts.iter().map(|&c| c as f64 / h as f64).collect()));
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        fill_lattice(counts, pos + 1, left - c, h, out);
    }
}

/// The scalarized problem `max_j (g_j - v_j) / d_j`.
#[derive(Debug, Clone)]
pub struct TchebycheffProblem {
    pub base: ObjectiveBundle,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
}

struct ScaledComponent {
    inner: Arc<dyn Component>,
    shift: f64,
    scale: f64,
}

impl Component for ScaledComponent {
    fn value(&self, x: &[f64]) -> f64 {
        (self.inner.value(x) - self.shift) / self.scale
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out);
        out.iter_mut().for_each(|g| *g /= self.scale);
    }
}

impl TchebycheffProblem {
    pub fn new(base: ObjectiveBundle, v: Vec<f64>, reference: &ReferenceVector, d_min: f64) -> Result<Self> {
        let m = base.len();
        if !(d_min > 0.0 && d_min.is_finite()) {
            return Err(Error::param("dMin", "must be positive"));
        }
        if v.len() != m {
            return Err(Error::Dimension {
                name: "v",
                expected: m,
                got: v.len(),
            });
        }
        if reference.len() != m {
            return Err(Error::Dimension {
                name: "reference",
                expected: m,
                got: reference.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("v", "translation must be finite"));
        }
        let d = reference.weights().iter().map(|&w| w.max(d_min)).collect();
        Ok(TchebycheffProblem { base, v, d })
    }

    /// Rescales `d` by a common positive factor. The minimizers of the
    /// scalarized problem do not change; only its conditioning does.
    pub fn rescaled(mut self, scaling: DScaling) -> Self {
        let factor = match scaling {
            DScaling::AsGiven => 1.0,
            DScaling::UnitMin => self.d.iter().copied().fold(f64::INFINITY, f64::min),
        };
        self.d.iter_mut().for_each(|d| *d /= factor);
        self
    }

    /// Component `j` is `(g_j - v_j) / d_j` with gradient `grad g_j / d_j`.
    pub fn bundle(&self) -> ObjectiveBundle {
        let components = (0..self.base.len())
            .map(|j| {
                Arc::new(ScaledComponent {
                    inner: self.base.component(j).clone(),
                    shift: self.v[j],
                    scale: self.d[j],
                }) as Arc<dyn Component>
            })
            .collect();
        ObjectiveBundle::new(self.base.dim(), components).expect("base bundle is valid")
    }
}

/// Shorthand for `TchebycheffProblem::new(..).bundle()`.
pub fn build_tchebycheff(
    base: &ObjectiveBundle,
    v: &[f64],
    reference: &ReferenceVector,
    d_min: f64,
) -> Result<ObjectiveBundle> {
    Ok(TchebycheffProblem::new(base.clone(), v.to_vec(), reference, d_min)?.bundle())
}

/// Common rescaling applied to the denominators before a front solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DScaling {
    /// `d_j = max(u_j, d_min)` unchanged.
    AsGiven,
    /// Divide by the smallest denominator so that `min_j d_j = 1`. Keeps the
    /// scalarized curvature no larger than the base problem's.
    #[default]
    UnitMin,
}

impl std::str::FromStr for DScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-given" => Ok(DScaling::AsGiven),
            "unit-min" => Ok(DScaling::UnitMin),
            other => Err(Error::param(
                "dScaling",
                format!("unknown value {other:?}, expected as-given or unit-min"),
            )),
        }
    }
}

/// Outcome of one reference-vector solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrontPoint {
    pub ref_index: usize,
    pub reference: ReferenceVector,
    pub theta: Vec<f64>,
    /// Base objectives `g(theta)`.
    pub objectives: Vec<f64>,
    /// Final Tchebycheff value.
    pub scalar_value: f64,
    pub stationarity_residual: f64,
    pub termination: TerminationReason,
    pub iterations: usize,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
}

/// Front-solve settings beyond the per-reference solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontOptions {
    pub d_min: f64,
    pub d_scaling: DScaling,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
    /// Keep full traces on the returned points.
    pub keep_traces: bool,
}

impl Default for FrontOptions {
    fn default() -> Self {
        FrontOptions {
            d_min: DEFAULT_D_MIN,
            d_scaling: DScaling::default(),
            jobs: 0,
            keep_traces: false,
        }
    }
}

/// Solves one Tchebycheff problem per reference vector, all from `start`.
///
/// Solves are independent and run in parallel; the result is in reference
/// order. A failed solve is recorded on its point and does not abort the batch.
pub fn solve_front(
    base: &ObjectiveBundle,
    v: &[f64],
    refs: &[ReferenceVector],
    start: &DecisionPoint,
    cfg: &SolverConfig,
    opts: &FrontOptions,
) -> Result<Vec<FrontPoint>> {
    if refs.is_empty() {
        return Err(Error::param("refs", "need at least one reference vector"));
    }
    cfg.validate()?;
    if start.dim() != base.dim() {
        return Err(Error::Dimension {
            name: "theta0",
            expected: base.dim(),
            got: start.dim(),
        });
    }
    let problems = refs
        .iter()
        .map(|r| TchebycheffProblem::new(base.clone(), v.to_vec(), r, opts.d_min).map(|t| t.rescaled(opts.d_scaling)))
        .collect::<Result<Vec<_>>>()?;

    let run = |(k, problem): (usize, &TchebycheffProblem)| -> FrontPoint {
        let bundle = problem.bundle();
        match solve_minimax(&bundle, start, cfg) {
            Ok((theta, trace)) => FrontPoint {
                ref_index: k,
                reference: refs[k].clone(),
                objectives: base
                    .values(theta.as_slice())
                    .unwrap_or_else(|_| vec![f64::NAN; base.len()]),
                theta: theta.into_inner(),
                scalar_value: trace.summary.final_value,
                stationarity_residual: trace.summary.final_stationarity_residual,
                termination: trace.summary.termination,
                iterations: trace.summary.iterations,
                trace: opts.keep_traces.then_some(trace),
            },
            Err(_) => FrontPoint {
                ref_index: k,
                reference: refs[k].clone(),
                theta: start.as_slice().to_vec(),
                objectives: vec![f64::NAN; base.len()],
                scalar_value: f64::NAN,
                stationarity_residual: f64::INFINITY,
                termination: TerminationReason::Divergence,
                iterations: 0,
                trace: None,
            },
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if opts.jobs > 0 {
        builder = builder.num_threads(opts.jobs);
    }
    let pool = builder.build().map_err(|e| Error::param("jobs", e.to_string()))?;
    Ok(pool.install(|| problems.par_iter().enumerate().map(run).collect()))
}

/// `a` dominates `b`: no worse in every objective and not equal.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a != b
}

/// Indices of the vectors not dominated by any other, in input order.
pub fn non_dominated_indices(objectives: &[Vec<f64>]) -> Vec<usize> {
    (0..objectives.len())
        .filter(|&i| !objectives.iter().any(|o| dominates(o, &objectives[i])))
        .collect()
}

/// Points whose objective vectors are not dominated, in input order.
pub fn non_dominated_filter(points: &[FrontPoint]) -> Vec<FrontPoint> {
    let objs: Vec<Vec<f64>> = points.iter().map(|p| p.objectives.clone()).collect();
    non_dominated_indices(&objs)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}
