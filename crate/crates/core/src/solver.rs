//! Steepest descent for `min_x max_i g_i(x)` with a nonmonotone adaptive step.
//!
//! Each outer iteration solves the direction subproblem on the `delta`-active
//! set, tests sufficient decrease at the current step `alpha_k`, updates the
//! step controller and then always moves to `x + alpha_k p_k`. There is no
//! line search: the trial point of the decrease test is the next iterate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{dot, max_with_index, norm, ActiveSet, DecisionPoint, ObjectiveBundle};
use crate::subproblem::{self, solve_sp, SubproblemInput};

/// Outer-loop parameters. Field names follow the CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sufficient-decrease coefficient, in `(0, 1/2)`.
    pub epsilon: f64,
    /// Shrink factor applied after a failed decrease test, in `(0, 1)`.
    pub sigma: f64,
    pub alpha0: f64,
    /// Active-set margin.
    pub delta: f64,
    /// Growth schedule base: `eta_k = gamma^(k+1)`.
    pub gamma: f64,
    /// Stop once `|p_k| <= p_tol`.
    pub p_tol: f64,
    pub max_outer_iter: usize,
    /// Iterates with `|x| > divergence_radius` end the run.
    pub divergence_radius: f64,
    pub sp_tol: f64,
    pub sp_max_iter: usize,
    /// Step with the already-updated `alpha_{k+1}` instead of `alpha_k`.
    pub step_uses_updated_alpha: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 0.4,
            sigma: 0.9,
            alpha0: 1.0,
            delta: 1.0,
            gamma: 0.01,
            p_tol: 1e-6,
            max_outer_iter: 100_000,
            divergence_radius: 1e6,
            sp_tol: subproblem::DEFAULT_SP_TOL,
            sp_max_iter: subproblem::DEFAULT_SP_MAX_ITER,
            step_uses_updated_alpha: false,
        }
    }
}

impl SolverConfig {
    /// Checks every field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        fn open(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<()> {
            if v > lo && v < hi {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} is outside ({lo}, {hi})")))
            }
        }
        open("epsilon", self.epsilon, 0.0, 0.5)?;
        open("sigma", self.sigma, 0.0, 1.0)?;
        open("gamma", self.gamma, 0.0, 1.0)?;
        open("alpha0", self.alpha0, 0.0, f64::INFINITY)?;
        open("delta", self.delta, 0.0, f64::INFINITY)?;
        open("pTol", self.p_tol, 0.0, f64::INFINITY)?;
        open("divergenceRadius", self.divergence_radius, 0.0, f64::INFINITY)?;
        open("spTol", self.sp_tol, 0.0, f64::INFINITY)?;
        if self.max_outer_iter == 0 {
            return Err(Error::param("maxOuterIter", "must be at least 1"));
        }
        if self.sp_max_iter == 0 {
            return Err(Error::param("spMaxIter", "must be at least 1"));
        }
        Ok(())
    }

    /// Upper bound of the accumulated growth, `sum_k eta_k = gamma / (1 - gamma)`.
    pub fn growth_budget(&self) -> f64 {
        self.gamma / (1.0 - self.gamma)
    }
}

/// Nonmonotone step-size state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepController {
    pub alpha: f64,
    /// Failed decrease tests so far.
    pub shrink_count: u32,
    pub iteration: usize,
}

impl StepController {
    pub fn new(alpha0: f64) -> Self {
        StepController {
            alpha: alpha0,
            shrink_count: 0,
            iteration: 0,
        }
    }

    /// `eta_k = gamma^(k+1)`.
    pub fn eta(k: usize, gamma: f64) -> f64 {
        gamma.powi(k.saturating_add(1).min(i32::MAX as usize) as i32)
    }

    /// Grows `alpha` by `eta_k * sigma^s` after a successful test, otherwise
    /// multiplies it by `sigma` and bumps the shrink counter.
    pub fn update(self, accepted: bool, gamma: f64, sigma: f64) -> Self {
        let (alpha, shrink_count) = if accepted {
            (
                self.alpha + Self::eta(self.iteration, gamma) * sigma.powi(self.shrink_count as i32),
                self.shrink_count,
            )
        } else {
            (self.alpha * sigma, self.shrink_count + 1)
        };
        StepController {
            alpha,
            shrink_count,
            iteration: self.iteration + 1,
        }
    }
}

/// `G(x + alpha p) <= G(x) - alpha * epsilon * |p|^2`, with exact comparison.
///
/// A non-finite value at the trial point fails the test.
pub fn decrease_test(bundle: &ObjectiveBundle, x: &[f64], p: &[f64], alpha: f64, epsilon: f64) -> Result<bool> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", "step must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param("epsilon", "must lie in (0, 1/2)"));
    }
    let (current, _) = bundle.eval_max(x)?;
    let trial: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
    let trial_value = bundle.eval_max(&trial).map(|(v, _)| v).unwrap_or(f64::INFINITY);
    Ok(sufficient_decrease(current, trial_value, alpha, epsilon, dot(p, p)))
}

fn sufficient_decrease(current: f64, trial: f64, alpha: f64, epsilon: f64, p_sq: f64) -> bool {
    trial.is_finite() && trial <= current - alpha * epsilon * p_sq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TerminationReason {
    /// `|p_k| <= p_tol`.
    PTol,
    MaxIter,
    Divergence,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::PTol => "pTol",
            TerminationReason::MaxIter => "maxIter",
            TerminationReason::Divergence => "divergence",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One outer iteration.
///
/// The record that triggers `p_tol` termination has `accepted == None`: no
/// step was taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationRecord {
    pub k: usize,
    pub theta: Vec<f64>,
    pub g_max: f64,
    pub norm_p: f64,
    pub beta: f64,
    /// Step `alpha_k` held by the controller at this iteration.
    pub alpha: f64,
    pub accepted: Option<bool>,
    /// Shrink count after this iteration's update.
    pub shrink_count: u32,
    pub active: Vec<usize>,
    pub duals: Vec<f64>,
    pub kkt_residual: f64,
    pub sp_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceSummary {
    pub iterations: usize,
    pub shrink_events: u32,
    pub final_value: f64,
    /// Min-norm combination of the `delta`-active gradients at the final point.
    pub final_stationarity_residual: f64,
    pub termination: TerminationReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub summary: TraceSummary,
}

impl IterationTrace {
    /// Iterations whose decrease test failed.
    pub fn violations(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| r.accepted == Some(false))
    }

    pub fn max_kkt_residual(&self) -> f64 {
        self.records.iter().map(|r| r.kkt_residual).fold(0.0, f64::max)
    }
}

/// Runs the outer iteration from `start`.
///
/// Configuration or dimension errors and a non-evaluable start point are
/// returned as `Err`. Divergence later in the run ends it with
/// [`TerminationReason::Divergence`] and the partial trace.
pub fn solve_minimax(
    bundle: &ObjectiveBundle,
    start: &DecisionPoint,
    cfg: &SolverConfig,
) -> Result<(DecisionPoint, IterationTrace)> {
    cfg.validate()?;
    let mut x = start.as_slice().to_vec();
    let mut values = bundle.values(&x)?;
    let mut ctrl = StepController::new(cfg.alpha0);
    let mut warm: Option<(Vec<usize>, Vec<f64>)> = None;
    let mut records = Vec::new();

    let termination = loop {
        if ctrl.iteration >= cfg.max_outer_iter {
            break TerminationReason::MaxIter;
        }
        let (g_max, _) = max_with_index(&values);
        let active = ActiveSet::from_values(&values, cfg.delta)?;
        let input = match SubproblemInput::from_bundle(bundle, &x, &values, &active.indices) {
            Ok(input) => input,
            Err(_) => break TerminationReason::Divergence,
        };
        let seed = warm
            .as_ref()
            .filter(|(idx, _)| *idx == active.indices)
            .map(|(_, u)| u.as_slice());
        let sol = solve_sp(&input, cfg.sp_tol, cfg.sp_max_iter, seed)?;
        let norm_p = sol.norm_p();

        let mut record = IterationRecord {
            k: ctrl.iteration,
            theta: x.clone(),
            g_max,
            norm_p,
            beta: sol.beta,
            alpha: ctrl.alpha,
            accepted: None,
            shrink_count: ctrl.shrink_count,
            active: active.indices.clone(),
            duals: sol.duals.clone(),
            kkt_residual: sol.kkt_residual,
            sp_converged: sol.converged,
        };

        if norm_p <= cfg.p_tol {
            records.push(record);
            break TerminationReason::PTol;
        }

        let p = &sol.p;
        let trial: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + ctrl.alpha * pi).collect();
        let trial_values = bundle.values(&trial).ok();
        let trial_max = trial_values
            .as_deref()
            .map(|v| max_with_index(v).0)
            .unwrap_or(f64::INFINITY);
        let accepted = sufficient_decrease(g_max, trial_max, ctrl.alpha, cfg.epsilon, norm_p * norm_p);
        let next_ctrl = ctrl.update(accepted, cfg.gamma, cfg.sigma);

        let (next_x, next_values) = if cfg.step_uses_updated_alpha {
            let nx: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + next_ctrl.alpha * pi).collect();
            let nv = bundle.values(&nx).ok();
            (nx, nv)
        } else {
            (trial, trial_values)
        };

        record.accepted = Some(accepted);
        records.push(record);
        warm = Some((sol.indices, sol.duals));
        ctrl = next_ctrl;

        let finite = next_x.iter().all(|v| v.is_finite());
        if finite {
            x = next_x;
        }
        match next_values {
            Some(v) if finite && norm(&x) <= cfg.divergence_radius => values = v,
            _ => break TerminationReason::Divergence,
        }
    };

    let final_value = bundle.eval_max(&x).map(|(v, _)| v).unwrap_or(f64::NAN);
    let final_stationarity_residual =
        subproblem::stationarity_residual(bundle, &x, cfg.delta, cfg.sp_tol).unwrap_or(f64::INFINITY);
    let summary = TraceSummary {
        iterations: records.len(),
        shrink_events: ctrl.shrink_count,
        final_value,
        final_stationarity_residual,
        termination,
    };
    Ok((DecisionPoint::new(x)?, IterationTrace { records, summary }))
}
