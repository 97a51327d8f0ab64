//! Estimators computed from ensembles: moments, ESS and mode masses.

use serde::Serialize;

use crate::ensemble::{normalize, Ensemble};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: Vec<f64>,
    /// Weighted second central moments (normalised weights, no bias correction).
    pub covariance_diag: Vec<f64>,
    pub n_effective: f64,
}

pub fn weighted_moments(ensemble: &Ensemble) -> Result<MomentSummary> {
    let weights = ensemble.weights();
    let w = normalize(&weights)?;
    let dim = ensemble.dim();
    let mut mean = vec![0.0; dim];
    for (p, wi) in ensemble.particles().iter().zip(&w) {
        for (m, x) in mean.iter_mut().zip(&p.position) {
            *m += wi * x;
        }
    }
    let mut var = vec![0.0; dim];
    for (p, wi) in ensemble.particles().iter().zip(&w) {
        for ((v, x), m) in var.iter_mut().zip(&p.position).zip(&mean) {
            *v += wi * (x - m) * (x - m);
        }
    }
    Ok(MomentSummary {
        mean,
        covariance_diag: var,
        n_effective: effective_sample_size(&weights)?,
    })
}

/// Full weighted covariance matrix, row-major.
pub fn weighted_covariance(ensemble: &Ensemble) -> Result<Vec<Vec<f64>>> {
    let w = normalize(&ensemble.weights())?;
    let mean = weighted_moments(ensemble)?.mean;
    let dim = ensemble.dim();
    let mut cov = vec![vec![0.0; dim]; dim];
    for (p, wi) in ensemble.particles().iter().zip(&w) {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += wi * (p.position[i] - mean[i]) * (p.position[j] - mean[j]);
            }
        }
    }
    Ok(cov)
}

/// Unweighted mean and diagonal second central moments of the positions.
pub fn sample_moments(ensemble: &Ensemble) -> (Vec<f64>, Vec<f64>) {
    let n = ensemble.len() as f64;
    let dim = ensemble.dim();
    let mut mean = vec![0.0; dim];
    for x in ensemble.positions() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for x in ensemble.positions() {
        for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

/// `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> Result<f64> {
    normalize(weights)?;
    // scaling by the largest weight keeps the squares in range and is exact for equal weights
    let max = weights.iter().copied().fold(0.0, f64::max);
    let (s1, s2) = weights.iter().fold((0.0, 0.0), |(a, b), w| {
        let r = w / max;
        (a + r, b + r * r)
    });
    Ok((s1 * s1 / s2).clamp(1.0, weights.len() as f64))
}

/// Weight fraction of particles whose nearest center (Euclidean) is each
/// of `centers`; ties go to the first center.
pub fn mode_mass(ensemble: &Ensemble, centers: &[Vec<f64>]) -> Result<Vec<f64>> {
    if centers.is_empty() {
        return Err(Error::param("mode_centers", "need at least one center"));
    }
    if let Some(c) = centers.iter().find(|c| c.len() != ensemble.dim()) {
        return Err(Error::Dimension {
            expected: ensemble.dim(),
            found: c.len(),
        });
    }
    let w = normalize(&ensemble.weights())?;
    let mut mass = vec![0.0; centers.len()];
    for (x, wi) in ensemble.positions().zip(&w) {
        mass[nearest(x, centers)] += wi;
    }
    Ok(mass)
}

pub(crate) fn nearest(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let dist = |c: &[f64]| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut best = 0;
    let mut best_d = dist(&centers[0]);
    for (k, c) in centers.iter().enumerate().skip(1) {
        let d = dist(c);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}
