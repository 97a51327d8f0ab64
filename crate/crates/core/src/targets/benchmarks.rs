use crate::error::{Error, Result};
use crate::target::{BoxConstraints, LogDensity, TargetDensity};

/// Banana density `log f(x, y) = (-5 (y - x^2)^2 - x^2) / 8`.
pub fn rosenbrock() -> TargetDensity {
    TargetDensity::new(Rosenbrock)
}

struct Rosenbrock;

impl LogDensity for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let r = x[1] - x[0] * x[0];
        (-5.0 * r * r - x[0] * x[0]) / 8.0
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        let r = x[1] - x[0] * x[0];
        grad[0] = (20.0 * x[0] * r - 2.0 * x[0]) / 8.0;
        grad[1] = -10.0 * r / 8.0;
    }
}

/// Independent Gaussian kernel with the given means and variances.
pub fn gaussian(mean: Vec<f64>, cov_diag: Vec<f64>) -> Result<TargetDensity> {
    if mean.is_empty() {
        return Err(Error::param("mean", "empty"));
    }
    if mean.len() != cov_diag.len() {
        return Err(Error::Dimension {
            expected: mean.len(),
            found: cov_diag.len(),
        });
    }
    if let Some(v) = cov_diag.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::param("cov_diag", format!("variance {v} is not positive")));
    }
    if mean.iter().any(|m| !m.is_finite()) {
        return Err(Error::param("mean", "non-finite component"));
    }
    let precision = cov_diag.iter().map(|v| 1.0 / v).collect();
    Ok(TargetDensity::new(DiagGaussian { mean, precision }))
}

struct DiagGaussian {
    mean: Vec<f64>,
    precision: Vec<f64>,
}

impl LogDensity for DiagGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x
            .iter()
            .zip(&self.mean)
            .zip(&self.precision)
            .map(|((xi, m), p)| (xi - m) * (xi - m) * p)
            .sum::<f64>()
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        for (d, g) in grad.iter_mut().enumerate() {
            *g = -(x[d] - self.mean[d]) * self.precision[d];
        }
    }
}

/// Maxima of the three smiley components: right eye, left eye, mouth.
pub const SMILEY_MODES: [[f64; 2]; 3] = [[2.5, 38.0 / 1.5], [-2.5, 38.0 / 1.5], [0.0, 0.0]];

/// Mixture of three banana kernels:
///
/// ```text
/// g(x, y) = exp((-6 (-(2.5 - x)^2 - 1.5 y + 38)^2 - (2.5 - x)^2) / 5)
///         + exp((-6 (-(x + 2.5)^2 - 1.5 y + 38)^2 - (x + 2.5)^2) / 5)
///         + exp((-5 (y - x^2)^2 - x^2) / 5)
/// ```
pub fn smiley() -> TargetDensity {
    TargetDensity::new(Smiley)
}

/// Exponents of the three smiley terms and their gradients.
pub fn smiley_components(x: f64, y: f64) -> [(f64, [f64; 2]); 3] {
    let eye = |c: f64, dc: f64| {
        // c = (2.5 - x) or (x + 2.5), dc = dc/dx
        let u = -c * c - 1.5 * y + 38.0;
        let a = (-6.0 * u * u - c * c) / 5.0;
        let du_dx = -2.0 * c * dc;
        let da_dx = (-12.0 * u * du_dx - 2.0 * c * dc) / 5.0;
        let da_dy = (-12.0 * u * -1.5) / 5.0;
        (a, [da_dx, da_dy])
    };
    let r = y - x * x;
    let mouth = (
        (-5.0 * r * r - x * x) / 5.0,
        [(20.0 * x * r - 2.0 * x) / 5.0, -2.0 * r],
    );
    [eye(2.5 - x, -1.0), eye(x + 2.5, 1.0), mouth]
}

struct Smiley;

impl LogDensity for Smiley {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let c = smiley_components(x[0], x[1]);
        let m = c.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        m + c.iter().map(|t| (t.0 - m).exp()).sum::<f64>().ln()
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let c = smiley_components(x[0], x[1]);
        let m = c.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        grad[0] = 0.0;
        grad[1] = 0.0;
        for (a, g) in &c {
            let w = (a - m).exp();
            total += w;
            grad[0] += w * g[0];
            grad[1] += w * g[1];
        }
        grad[0] /= total;
        grad[1] /= total;
        m + total.ln()
    }
}

/// Dropwave `log f = (cos(5 r) + 1) / (r^2 + 2)` restricted to `[-2.5, 2.5]^2`.
pub fn dropwave() -> TargetDensity {
    TargetDensity::new(Dropwave)
        .with_constraints(BoxConstraints::cube(2, -2.5, 2.5).expect("valid box"))
        .expect("matching dims")
}

struct Dropwave;

impl LogDensity for Dropwave {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        ((5.0 * r2.sqrt()).cos() + 1.0) / (r2 + 2.0)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r = r2.sqrt();
        // sin(5r)/r, continuous at the origin
        let sinc = if r < 1e-8 { 5.0 } else { (5.0 * r).sin() / r };
        let denom = r2 + 2.0;
        let radial = (-5.0 * sinc * denom - 2.0 * ((5.0 * r).cos() + 1.0)) / (denom * denom);
        grad[0] = radial * x[0];
        grad[1] = radial * x[1];
    }
}
