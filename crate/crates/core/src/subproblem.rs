//! Direction-finding subproblem.
//!
//! At an iterate with active gradients `a_i` and values `c_i` the primal problem is
//!
//! ```text
//! minimize    beta + 0.5 * |p|^2
//! subject to  <a_i, p> + c_i - beta <= 0      for every active i
//! ```
//!
//! It is solved through its dual, a quadratic program over the unit simplex:
//!
//! ```text
//! minimize    phi(u) = 0.5 * |sum_i u_i a_i|^2 - sum_i u_i c_i
//! subject to  u >= 0, sum_i u_i = 1
//! ```
//!
//! The primal solution is recovered as `p = -sum_i u_i a_i` and
//! `beta = max_i (<a_i, p> + c_i)`. The dual is minimized by projected gradient
//! with a fixed step `1 / L`, where `L` bounds the curvature of `phi` along the
//! simplex. Termination uses the Frank-Wolfe gap, which coincides with the
//! complementarity residual of the primal-dual pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{dot, norm, ObjectiveBundle};

pub const DEFAULT_SP_TOL: f64 = 1e-10;
pub const DEFAULT_SP_MAX_ITER: usize = 10_000;

const POWER_ITERATIONS: usize = 20;

/// Constraint data of the subproblem restricted to the active indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemInput {
    gradients: Vec<Vec<f64>>,
    values: Vec<f64>,
    indices: Vec<usize>,
}

impl SubproblemInput {
    pub fn new(gradients: Vec<Vec<f64>>, values: Vec<f64>, indices: Vec<usize>) -> Result<Self> {
        let r = gradients.len();
        if r == 0 {
            return Err(Error::param("gradients", "subproblem needs at least one constraint"));
        }
        if values.len() != r {
            return Err(Error::Dimension {
                name: "values",
                expected: r,
                got: values.len(),
            });
        }
        if indices.len() != r {
            return Err(Error::Dimension {
                name: "indices",
                expected: r,
                got: indices.len(),
            });
        }
        let n = gradients[0].len();
        for (k, g) in gradients.iter().enumerate() {
            if g.len() != n {
                return Err(Error::Dimension {
                    name: "gradients",
                    expected: n,
                    got: g.len(),
                });
            }
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::Evaluation {
                    index: indices[k],
                    what: "gradient",
                });
            }
            if !values[k].is_finite() {
                return Err(Error::Evaluation {
                    index: indices[k],
                    what: "value",
                });
            }
        }
        Ok(SubproblemInput {
            gradients,
            values,
            indices,
        })
    }

    /// Input with all values zero: the dual then finds the minimum-norm
    /// element of the convex hull of the gradients.
    pub fn min_norm(gradients: Vec<Vec<f64>>, indices: Vec<usize>) -> Result<Self> {
        let r = gradients.len();
        Self::new(gradients, vec![0.0; r], indices)
    }

    /// Gathers gradients and values of `indices` from a bundle at `x`.
    pub fn from_bundle(bundle: &ObjectiveBundle, x: &[f64], values: &[f64], indices: &[usize]) -> Result<Self> {
        let gradients = indices
            .iter()
            .map(|&i| bundle.gradient(i, x))
            .collect::<Result<Vec<_>>>()?;
        let vals = indices.iter().map(|&i| values[i]).collect();
        Self::new(gradients, vals, indices.to_vec())
    }

    pub fn len(&self) -> usize {
        self.gradients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gradients.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.gradients[0].len()
    }

    pub fn gradients(&self) -> &[Vec<f64>] {
        &self.gradients
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    fn gram(&self) -> Vec<Vec<f64>> {
        let r = self.len();
        let mut q = vec![vec![0.0; r]; r];
        for i in 0..r {
            for j in i..r {
                let v = dot(&self.gradients[i], &self.gradients[j]);
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        q
    }
}

/// Primal-dual solution of the subproblem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSolution {
    /// Descent direction `p = -sum u_i a_i`.
    pub p: Vec<f64>,
    pub beta: f64,
    /// Dual weights on the active indices (same order as `indices`).
    pub duals: Vec<f64>,
    /// Original component indices of the constraints.
    pub indices: Vec<usize>,
    /// Max of the stationarity, feasibility and complementarity residuals.
    pub kkt_residual: f64,
    /// Projected-gradient iterations used.
    pub iterations: usize,
    pub converged: bool,
}

impl DirectionSolution {
    pub fn norm_p(&self) -> f64 {
        norm(&self.p)
    }

    /// Primal objective `beta + 0.5 |p|^2`.
    pub fn primal_objective(&self) -> f64 {
        self.beta + 0.5 * dot(&self.p, &self.p)
    }
}

/// Euclidean projection onto `{u >= 0, sum u = 1}` (sort-based, exact).
pub fn project_simplex(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(Error::param("w", "cannot project an empty vector"));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::param("w", format!("entry {i} is not finite")));
    }
    Ok(project_simplex_unchecked(w))
}

fn project_simplex_unchecked(w: &[f64]) -> Vec<f64> {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    w.iter().map(|&v| (v - tau).max(0.0)).collect()
}

fn quad_form(q: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    q.iter().map(|row| dot(row, u)).collect()
}

/// Largest curvature of `phi` along the simplex, i.e. the top eigenvalue of
/// the Gram matrix restricted to `{d : sum d = 0}`.
fn tangent_curvature(q: &[Vec<f64>]) -> f64 {
    let r = q.len();
    if r < 2 {
        return 0.0;
    }
    let center = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / r as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    // Irregular start so it is unlikely to be orthogonal to the top eigenvector.
    let mut v: Vec<f64> = (0..r).map(|i| ((i + 1) as f64).sqrt()).collect();
    center(&mut v);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut qv = quad_form(q, &v);
        estimate = dot(&v, &qv);
        center(&mut qv);
        v = qv;
    }
    estimate.max(0.0)
}

/// Solves the subproblem through its simplex-constrained dual.
///
/// `warm` seeds the dual iterate (it is projected onto the simplex first);
/// otherwise the uniform vector is used. A solve that exhausts `max_iter`
/// returns its best iterate with `converged == false`.
pub fn solve_sp(input: &SubproblemInput, tol: f64, max_iter: usize, warm: Option<&[f64]>) -> Result<DirectionSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("spTol", "tolerance must be positive"));
    }
    let r = input.len();
    let c = &input.values;
    let mut u = match warm {
        Some(w) if w.len() == r => project_simplex(w)?,
        Some(w) => {
            return Err(Error::Dimension {
                name: "warm",
                expected: r,
                got: w.len(),
            })
        }
        None => vec![1.0 / r as f64; r],
    };

    let q = input.gram();
    // Shifting every value by the same constant leaves the minimizer unchanged.
    let c_max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c: Vec<f64> = c.iter().map(|v| v - c_max).collect();
    let c = &c;
    let c_scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_spread = -c.iter().copied().fold(f64::INFINITY, f64::min);
    // A near-linear dual would otherwise take huge steps and lose precision in
    // the projection; the value spread caps the step length at O(1).
    let mut lipschitz = tangent_curvature(&q).max(c_spread);
    if lipschitz <= 0.0 {
        lipschitz = 1.0;
    }

    let phi = |u: &[f64], qu: &[f64]| 0.5 * dot(u, qu) - dot(u, c);
    let fw_gap = |u: &[f64], grad: &[f64]| {
        let min = grad.iter().copied().fold(f64::INFINITY, f64::min);
        (dot(u, grad) - min).max(0.0)
    };

    let mut qu = quad_form(&q, &u);
    let mut grad: Vec<f64> = qu.iter().zip(c).map(|(a, b)| a - b).collect();
    let mut gap = fw_gap(&u, &grad);
    let mut best = (gap, u.clone());
    let mut iterations = 0;

    // The direction error is bounded by sqrt(2 * gap), so the gap has to shrink
    // with |p|^2 for the direction to stay meaningful near stationarity.
    let target = |u: &[f64], qu: &[f64]| tol * dot(u, qu).clamp(0.0, 1.0);
    while gap > target(&u, &qu) && iterations < max_iter && r > 1 {
        iterations += 1;
        let current = phi(&u, &qu);
        let grad_mean = grad.iter().sum::<f64>() / r as f64;
        let next = loop {
            let trial: Vec<f64> = u
                .iter()
                .zip(&grad)
                .map(|(ui, gi)| ui - (gi - grad_mean) / lipschitz)
                .collect();
            let next = project_simplex_unchecked(&trial);
            let q_next = quad_form(&q, &next);
            let value = phi(&next, &q_next);
            if value <= current + 1e-15 * (current.abs() + c_scale) || lipschitz > 1e300 {
                break (next, q_next);
            }
            // Curvature was underestimated by the power iteration.
            lipschitz *= 2.0;
        };
        if next.0 == u {
            // fixed point in floating point
            break;
        }
        (u, qu) = next;
        grad = qu.iter().zip(c).map(|(a, b)| a - b).collect();
        gap = fw_gap(&u, &grad);
        if gap < best.0 {
            best = (gap, u.clone());
        }
    }

    let u = if gap <= best.0 { u } else { best.1 };
    let mut solution = recover_primal(input, u);
    solution.iterations = iterations;
    solution.converged = solution.kkt_residual <= tol;
    Ok(solution)
}

/// Builds `(p, beta)` from dual weights and evaluates the KKT residuals.
fn recover_primal(input: &SubproblemInput, duals: Vec<f64>) -> DirectionSolution {
    let n = input.dim();
    let mut combo = vec![0.0; n];
    for (w, a) in duals.iter().zip(&input.gradients) {
        for (acc, v) in combo.iter_mut().zip(a) {
            *acc += w * v;
        }
    }
    let p: Vec<f64> = combo.iter().map(|v| -v).collect();
    // Residuals are invariant under a common shift of the values; measuring
    // them relative to the largest value avoids cancellation when G is large.
    let shift = input.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lin: Vec<f64> = input
        .gradients
        .iter()
        .zip(&input.values)
        .map(|(a, c)| dot(a, &p) + (c - shift))
        .collect();
    let lin_max = lin.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let beta = lin_max + shift;

    let stationarity = p.iter().zip(&combo).map(|(pi, ci)| (pi + ci).abs()).fold(0.0, f64::max);
    let sum_dev = (duals.iter().sum::<f64>() - 1.0).abs();
    let negativity = duals.iter().fold(0.0f64, |m, &w| m.max(-w));
    let infeasibility = lin.iter().fold(0.0f64, |m, &l| m.max(l - lin_max));
    let complementarity: f64 = duals.iter().zip(&lin).map(|(w, l)| w.abs() * (lin_max - l)).sum();

    let kkt_residual = stationarity
        .max(sum_dev)
        .max(negativity)
        .max(infeasibility)
        .max(complementarity);

    DirectionSolution {
        p,
        beta,
        duals,
        indices: input.indices.clone(),
        kkt_residual,
        iterations: 0,
        converged: false,
    }
}

/// `min_{u in simplex} |sum_i u_i grad g_i(x)|` over the `delta`-active set.
///
/// Zero means `x` is a stationary point of the max-function.
pub fn stationarity_residual(bundle: &ObjectiveBundle, x: &[f64], delta: f64, tol: f64) -> Result<f64> {
    let values = bundle.values(x)?;
    let active = crate::problem::ActiveSet::from_values(&values, delta)?;
    let gradients = active
        .indices
        .iter()
        .map(|&i| bundle.gradient(i, x))
        .collect::<Result<Vec<_>>>()?;
    let input = SubproblemInput::min_norm(gradients, active.indices)?;
    Ok(solve_sp(&input, tol, DEFAULT_SP_MAX_ITER, None)?.norm_p())
}
