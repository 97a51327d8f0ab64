//! Gaussian kernel density estimates.
//!
//! [`kde_target`] turns a data set into a smooth sampling target; the
//! leave-one-out estimate [`loo_log_density`] replaces the theoretical
//! previous-stage density in the HSMC correction weights.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::target::{BoxConstraints, LogDensity, TargetDensity};

/// Kernels this far below the running maximum (in log space) are skipped;
/// their total relative contribution is below `n * exp(-50)`.
const LOG_CUTOFF: f64 = -50.0;

/// A product-Gaussian KDE with per-dimension bandwidths.
#[derive(Clone, Debug)]
pub struct KdeModel {
    dim: usize,
    /// Row-major `n x dim`.
    points: Vec<f64>,
    inv_bandwidth: Vec<f64>,
    bandwidth: Vec<f64>,
    /// `-log(n) - sum_d log(h_d) - d/2 log(2 pi)`
    log_norm: f64,
}

impl KdeModel {
    pub fn new<P: AsRef<[f64]>>(points: &[P], bandwidth: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "empty point set"));
        }
        let dim = bandwidth.len();
        if dim == 0 {
            return Err(Error::param("bandwidth", "empty"));
        }
        if let Some(h) = bandwidth.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::param("bandwidth", format!("component {h} is not positive")));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        let log_norm = -(points.len() as f64).ln()
            - bandwidth.iter().map(|h| h.ln()).sum::<f64>()
            - 0.5 * dim as f64 * (2.0 * PI).ln();
        Ok(KdeModel {
            dim,
            points: flat,
            inv_bandwidth: bandwidth.iter().map(|h| 1.0 / h).collect(),
            bandwidth,
            log_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    fn point(&self, m: usize) -> &[f64] {
        &self.points[m * self.dim..(m + 1) * self.dim]
    }

    /// Normalised log-density at `x`, optionally leaving out point `skip`.
    fn log_sum(&self, x: &[f64], skip: Option<usize>, grad: Option<&mut [f64]>) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut acc = [0.0f64; 8];
        let mut acc_vec;
        let g: &mut [f64] = if self.dim <= acc.len() {
            &mut acc[..self.dim]
        } else {
            acc_vec = vec![0.0; self.dim];
            &mut acc_vec
        };
        let want_grad = grad.is_some();
        for (m, p) in self.points.chunks_exact(self.dim).enumerate() {
            if Some(m) == skip {
                continue;
            }
            let mut q = 0.0;
            for d in 0..self.dim {
                let z = (x[d] - p[d]) * self.inv_bandwidth[d];
                q += z * z;
            }
            let e = -0.5 * q;
            let w = if e > max {
                let scale = (max - e).exp();
                sum *= scale;
                if want_grad {
                    g.iter_mut().for_each(|v| *v *= scale);
                }
                max = e;
                1.0
            } else if e - max < LOG_CUTOFF {
                continue;
            } else {
                (e - max).exp()
            };
            sum += w;
            if want_grad {
                for d in 0..self.dim {
                    g[d] -= w * (x[d] - p[d]) * self.inv_bandwidth[d] * self.inv_bandwidth[d];
                }
            }
        }
        if let Some(out) = grad {
            for d in 0..self.dim {
                out[d] = if sum > 0.0 { g[d] / sum } else { 0.0 };
            }
        }
        if sum > 0.0 {
            max + sum.ln() + self.log_norm
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Leave-one-out log-density at the model's own point `index`, normalised
    /// over the remaining `n - 1` kernels.
    pub fn loo_log_density(&self, index: usize) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::Size { min: 2, got: n });
        }
        if index >= n {
            return Err(Error::Index { index, len: n });
        }
        let raw = self.log_sum(self.point(index), Some(index), None);
        // log_norm carries -log(n); the sum has n - 1 terms
        Ok(raw + (n as f64).ln() - ((n - 1) as f64).ln())
    }
}

impl LogDensity for KdeModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_sum(x, None, None)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_sum(x, None, Some(grad));
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.log_sum(x, None, Some(grad))
    }
}

/// KDE of `points` as a sampling target. Constraints, when given, are
/// attached to the target without truncating the kernels.
pub fn kde_target<P: AsRef<[f64]>>(
    points: &[P],
    bandwidth: Vec<f64>,
    constraints: Option<BoxConstraints>,
) -> Result<TargetDensity> {
    let model = KdeModel::new(points, bandwidth)?;
    let target = TargetDensity::new(model);
    match constraints {
        Some(c) => target.with_constraints(c),
        None => Ok(target),
    }
}

/// The leave-one-out log-density of particle `index` given the others.
/// Particle weights are ignored.
pub fn loo_log_density(ensemble: &Ensemble, index: usize, bandwidth: &[f64]) -> Result<f64> {
    if index >= ensemble.len() {
        return Err(Error::Index {
            index,
            len: ensemble.len(),
        });
    }
    ensemble_model(ensemble, bandwidth)?.loo_log_density(index)
}

/// [`loo_log_density`] for every particle, evaluated in parallel.
pub fn loo_log_densities(ensemble: &Ensemble, bandwidth: &[f64]) -> Result<Vec<f64>> {
    let model = ensemble_model(ensemble, bandwidth)?;
    (0..ensemble.len())
        .into_par_iter()
        .map(|i| model.loo_log_density(i))
        .collect()
}

fn ensemble_model(ensemble: &Ensemble, bandwidth: &[f64]) -> Result<KdeModel> {
    if ensemble.len() < 2 {
        return Err(Error::Size {
            min: 2,
            got: ensemble.len(),
        });
    }
    let points: Vec<&[f64]> = ensemble.positions().collect();
    KdeModel::new(&points, bandwidth.to_vec())
}

/// Per-dimension sample standard deviations (`n - 1` denominator).
pub fn sample_sd<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Size { min: 2, got: n });
    }
    let dim = points[0].as_ref().len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; dim];
    for p in points {
        for ((s, v), m) in var.iter_mut().zip(p.as_ref()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    Ok(var.into_iter().map(|s| (s / (n - 1) as f64).sqrt()).collect())
}

/// Silverman's rule, `h_d = sd_d * (4 / ((d + 2) N))^(1 / (d + 4))`.
pub fn silverman_bandwidth(ensemble: &Ensemble) -> Result<Vec<f64>> {
    let points: Vec<&[f64]> = ensemble.positions().collect();
    let sd = sample_sd(&points)?;
    let d = ensemble.dim() as f64;
    let n = ensemble.len() as f64;
    degenerate_check(&sd)?;
    let factor = (4.0 / ((d + 2.0) * n)).powf(1.0 / (d + 4.0));
    Ok(sd.into_iter().map(|s| s * factor).collect())
}

/// The `n^(-1/5)` shrinkage rate.
pub fn rate_factor(n: usize) -> f64 {
    (n as f64).powf(-0.2)
}

/// Data bandwidth `h_d = sd_d(data) * n^(-1/5)`.
pub fn scaled_rate_bandwidth<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<f64>> {
    let sd = sample_sd(points)?;
    degenerate_check(&sd)?;
    let f = rate_factor(points.len());
    Ok(sd.into_iter().map(|s| s * f).collect())
}

fn degenerate_check(sd: &[f64]) -> Result<()> {
    match sd.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        Some(d) => Err(Error::DegenerateEnsemble(format!("zero spread in dimension {d}"))),
        None => Ok(()),
    }
}
