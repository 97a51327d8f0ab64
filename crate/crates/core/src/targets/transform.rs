use crate::error::{Error, Result};
use crate::target::{LogDensity, TargetDensity};

/// `f^gamma`: the annealing transform. Constraints carry over.
pub fn powered(target: TargetDensity, gamma: f64) -> Result<TargetDensity> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    let constraints = target.constraints().cloned();
    Ok(TargetDensity::new(Powered { inner: target, gamma }).with_optional_constraints(constraints))
}

struct Powered {
    inner: TargetDensity,
    gamma: f64,
}

impl LogDensity for Powered {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.gamma * self.inner.log_f(x)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.inner.grad_into(x, grad);
        grad.iter_mut().for_each(|g| *g *= self.gamma);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let l = self.inner.log_f_and_grad(x, grad);
        grad.iter_mut().for_each(|g| *g *= self.gamma);
        self.gamma * l
    }
}

/// `f^phi * f1^(1 - phi)`. The result carries the intersection of both
/// targets' constraints.
pub fn geometric_bridge(f1: TargetDensity, f: TargetDensity, phi: f64) -> Result<TargetDensity> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::param("phi", format!("must lie in [0, 1], got {phi}")));
    }
    if f1.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: f1.dim(),
            found: f.dim(),
        });
    }
    let constraints = match (f1.constraints(), f.constraints()) {
        (Some(a), Some(b)) => Some(a.intersect(b)?),
        (a, b) => a.or(b).cloned(),
    };
    let buffer = f.dim();
    Ok(TargetDensity::new(Bridge {
        start: f1,
        end: f,
        phi,
        buffer,
    })
    .with_optional_constraints(constraints))
}

struct Bridge {
    start: TargetDensity,
    end: TargetDensity,
    phi: f64,
    buffer: usize,
}

impl LogDensity for Bridge {
    fn dim(&self) -> usize {
        self.end.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        // exact endpoints, and no 0 * -inf
        if self.phi == 0.0 {
            return self.start.log_f(x);
        }
        if self.phi == 1.0 {
            return self.end.log_f(x);
        }
        self.phi * self.end.log_f(x) + (1.0 - self.phi) * self.start.log_f(x)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        if self.phi == 0.0 {
            return self.start.log_f_and_grad(x, grad);
        }
        if self.phi == 1.0 {
            return self.end.log_f_and_grad(x, grad);
        }
        let mut other = vec![0.0; self.buffer];
        let a = self.end.log_f_and_grad(x, grad);
        let b = self.start.log_f_and_grad(x, &mut other);
        for (g, o) in grad.iter_mut().zip(&other) {
            *g = self.phi * *g + (1.0 - self.phi) * o;
        }
        self.phi * a + (1.0 - self.phi) * b
    }
}

/// `f * g`, e.g. a likelihood times a prior. Constraints intersect.
pub fn product(f: TargetDensity, g: TargetDensity) -> Result<TargetDensity> {
    if f.dim() != g.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let constraints = match (f.constraints(), g.constraints()) {
        (Some(a), Some(b)) => Some(a.intersect(b)?),
        (a, b) => a.or(b).cloned(),
    };
    Ok(TargetDensity::new(Product { f, g }).with_optional_constraints(constraints))
}

struct Product {
    f: TargetDensity,
    g: TargetDensity,
}

impl LogDensity for Product {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.f.log_f(x) + self.g.log_f(x)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut other = vec![0.0; grad.len()];
        let a = self.f.log_f_and_grad(x, grad);
        let b = self.g.log_f_and_grad(x, &mut other);
        for (g, o) in grad.iter_mut().zip(&other) {
            *g += o;
        }
        a + b
    }
}
