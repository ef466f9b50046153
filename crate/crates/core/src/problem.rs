//! Differentiable multi-function problems and the max-function they induce.
//!
//! An [`ObjectiveBundle`] is an ordered set of smooth scalar functions
//! `g_1, ..., g_m` on a fixed `n`-dimensional space. The minimax objective is
//! `G(x) = max_i g_i(x)`; the active set at margin `delta` is every index whose
//! value lies within `delta` of `G(x)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the decision space. All coordinates are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DecisionPoint(Vec<f64>);

impl DecisionPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::param(
                "theta",
                "decision point must have at least one coordinate",
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::param("theta", format!("coordinate {i} is not finite")));
        }
        Ok(DecisionPoint(coords))
    }

    /// Constant point `(value, ..., value)` of dimension `n`.
    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl TryFrom<Vec<f64>> for DecisionPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DecisionPoint::new(v)
    }
}

impl From<DecisionPoint> for Vec<f64> {
    fn from(p: DecisionPoint) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for DecisionPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// One smooth scalar function with an analytic gradient.
pub trait Component: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `out` (length `n`).
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// Adapter turning a pair of closures into a [`Component`].
pub struct FnComponent<V, G> {
    value: V,
    gradient: G,
}

impl<V, G> FnComponent<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(value: V, gradient: G) -> Self {
        FnComponent { value, gradient }
    }
}

impl<V, G> Component for FnComponent<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
}

/// An immutable, cheaply clonable collection of `m >= 1` components on `R^n`.
///
/// Component `i` always refers to the same function; indices are 0-based.
#[derive(Clone)]
pub struct ObjectiveBundle {
    dim: usize,
    components: Arc<[Arc<dyn Component>]>,
}

impl fmt::Debug for ObjectiveBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveBundle")
            .field("dim", &self.dim)
            .field("components", &self.components.len())
            .finish()
    }
}

impl ObjectiveBundle {
    pub fn new(dim: usize, components: Vec<Arc<dyn Component>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension", "must be at least 1"));
        }
        if components.is_empty() {
            return Err(Error::param("components", "bundle needs at least one component"));
        }
        Ok(ObjectiveBundle {
            dim,
            components: components.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &Arc<dyn Component> {
        &self.components[i]
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                name: "theta",
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// All component values at `x`.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let v = c.value(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation {
                        index: i,
                        what: "value",
                    })
                }
            })
            .collect()
    }

    /// Gradient of component `i` at `x`.
    pub fn gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim];
        self.components[i].gradient(x, &mut g);
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Evaluation {
                index: i,
                what: "gradient",
            })
        }
    }

    /// `G(x) = max_i g_i(x)` together with the smallest index attaining it.
    pub fn eval_max(&self, x: &[f64]) -> Result<(f64, usize)> {
        Ok(max_with_index(&self.values(x)?))
    }

    /// Indices within `delta` of the max value.
    pub fn active_set(&self, x: &[f64], delta: f64) -> Result<ActiveSet> {
        ActiveSet::from_values(&self.values(x)?, delta)
    }

    /// Compares each analytic gradient against central differences.
    ///
    /// Coordinate `j` uses the step `h * max(1, |x_j|)`. Returns the largest
    /// absolute entrywise deviation for each component.
    pub fn check_gradients(&self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("h", "finite-difference step must be positive"));
        }
        self.check_dim(x)?;
        let mut probe = x.to_vec();
        let mut out = Vec::with_capacity(self.len());
        for (i, c) in self.components.iter().enumerate() {
            let grad = self.gradient(i, x)?;
            let mut worst = 0.0f64;
            for j in 0..self.dim {
                let step = h * x[j].abs().max(1.0);
                probe[j] = x[j] + step;
                let fp = c.value(&probe);
                probe[j] = x[j] - step;
                let fm = c.value(&probe);
                probe[j] = x[j];
                if !(fp.is_finite() && fm.is_finite()) {
                    return Err(Error::Evaluation {
                        index: i,
                        what: "finite-difference stencil",
                    });
                }
                let fd = (fp - fm) / (2.0 * step);
                worst = worst.max((fd - grad[j]).abs());
            }
            out.push(worst);
        }
        Ok(out)
    }
}

/// Indices `j` with `g_j(x) >= G(x) - margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    pub margin: f64,
    pub max_value: f64,
}

impl ActiveSet {
    /// Builds the active set from precomputed component values.
    pub fn from_values(values: &[f64], margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(Error::param("delta", "active-set margin must be positive and finite"));
        }
        if values.is_empty() {
            return Err(Error::param("components", "no component values"));
        }
        let (max_value, _) = max_with_index(values);
        let floor = max_value - margin;
        let indices = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= floor)
            .map(|(i, _)| i)
            .collect();
        Ok(ActiveSet {
            indices,
            margin,
            max_value,
        })
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Max and first argmax. `values` must be non-empty.
pub(crate) fn max_with_index(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
