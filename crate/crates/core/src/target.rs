//! Log-density kernels consumed by every sampler.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An unnormalised log-density with its gradient.
///
/// `log_density` returns a finite value or `-inf` (zero density), never NaN.
/// `grad_log_density` writes exactly `dim()` components and is finite wherever
/// the log-density is.
pub trait LogDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> f64;

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]);

    /// Both at once; override when they share work.
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.grad_log_density(x, grad);
        self.log_density(x)
    }
}

/// Per-dimension bounds `lower_d <= x_d <= upper_d`; infinite bounds mean the
/// dimension is free.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxConstraints {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxConstraints {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::param("constraints", "zero-dimensional box"));
        }
        for (d, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l >= u {
                return Err(Error::param(
                    "constraints",
                    format!("dimension {d}: need lower < upper, got [{l}, {u}]"),
                ));
            }
        }
        Ok(BoxConstraints { lower, upper })
    }

    /// The same interval `[low, high]` in every dimension.
    pub fn cube(dim: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![low; dim], vec![high; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_constrained(&self, d: usize) -> bool {
        self.lower[d].is_finite() || self.upper[d].is_finite()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    /// Elementwise intersection of two boxes.
    pub fn intersect(&self, other: &BoxConstraints) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let lower = self.lower.iter().zip(&other.lower).map(|(a, b)| a.max(*b)).collect();
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a.min(*b)).collect();
        Self::new(lower, upper)
    }
}

/// A shareable target: the log-density plus optional box constraints.
#[derive(Clone)]
pub struct TargetDensity {
    density: Arc<dyn LogDensity>,
    constraints: Option<BoxConstraints>,
}

impl TargetDensity {
    pub fn new(density: impl LogDensity + 'static) -> Self {
        TargetDensity {
            density: Arc::new(density),
            constraints: None,
        }
    }

    /// Builds a target from closures.
    pub fn from_fns<F, G>(dim: usize, log_f: F, grad_log_f: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(FnDensity {
            dim,
            log_f,
            grad_log_f,
        })
    }

    pub fn with_constraints(mut self, constraints: BoxConstraints) -> Result<Self> {
        if constraints.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: constraints.dim(),
            });
        }
        self.constraints = Some(constraints);
        Ok(self)
    }

    pub(crate) fn with_optional_constraints(mut self, constraints: Option<BoxConstraints>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn constraints(&self) -> Option<&BoxConstraints> {
        self.constraints.as_ref()
    }

    /// Whether `x` satisfies the box constraints (always true when unconstrained).
    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.as_ref().is_none_or(|c| c.contains(x))
    }

    /// `-inf` outside the constraint box.
    pub fn log_f(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return f64::NEG_INFINITY;
        }
        self.density.log_density(x)
    }

    pub fn grad_log_f(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.density.grad_log_density(x, &mut g);
        g
    }

    pub fn grad_into(&self, x: &[f64], grad: &mut [f64]) {
        self.density.grad_log_density(x, grad)
    }

    pub fn log_f_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        if !self.contains(x) {
            grad.fill(0.0);
            return f64::NEG_INFINITY;
        }
        self.density.log_density_and_grad(x, grad)
    }

    pub fn density(&self) -> &Arc<dyn LogDensity> {
        &self.density
    }
}

impl fmt::Debug for TargetDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetDensity")
            .field("dim", &self.dim())
            .field("constraints", &self.constraints)
            .finish_non_exhaustive()
    }
}

struct FnDensity<F, G> {
    dim: usize,
    log_f: F,
    grad_log_f: G,
}

impl<F, G> LogDensity for FnDensity<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        (self.log_f)(x)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        (self.grad_log_f)(x, grad)
    }
}
