//! Weighted particle ensembles.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub weight: f64,
}

impl Particle {
    pub fn new(position: Vec<f64>) -> Self {
        Particle {
            position,
            weight: 1.0,
        }
    }
}

/// `N >= 2` particles of a common dimension, tagged with the iteration that
/// produced them and the parallel group they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    particles: Vec<Particle>,
    iteration: usize,
    group: usize,
}

/// Wraps raw draws as an iteration-0 ensemble with unit weights.
pub fn make_ensemble(draws: Vec<Vec<f64>>) -> Result<Ensemble> {
    Ensemble::new(draws.into_iter().map(Particle::new).collect(), 0, 0)
}

impl Ensemble {
    pub fn new(particles: Vec<Particle>, iteration: usize, group: usize) -> Result<Self> {
        if particles.len() < 2 {
            return Err(Error::Size {
                min: 2,
                got: particles.len(),
            });
        }
        let dim = particles[0].position.len();
        if dim == 0 {
            return Err(Error::param("draws", "zero-dimensional positions"));
        }
        for p in &particles {
            if p.position.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.position.len(),
                });
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::DegenerateWeights(format!("invalid weight {}", p.weight)));
            }
        }
        Ok(Ensemble {
            particles,
            iteration,
            group,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.particles[0].position.len()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn into_particles(self) -> Vec<Particle> {
        self.particles
    }

    pub fn position(&self, index: usize) -> &[f64] {
        &self.particles[index].position
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.particles.iter().map(|p| p.position.as_slice())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    /// True when every weight is exactly 1, as after a selection phase.
    pub fn is_unweighted(&self) -> bool {
        self.particles.iter().all(|p| p.weight == 1.0)
    }

    pub fn with_iteration(mut self, iteration: usize) -> Self {
        self.iteration = iteration;
        self
    }

    pub fn with_group(mut self, group: usize) -> Self {
        self.group = group;
        self
    }

    /// Replaces every weight; lengths must match.
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Size {
                min: self.len(),
                got: weights.len(),
            });
        }
        for (p, &w) in self.particles.iter_mut().zip(weights) {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::DegenerateWeights(format!("invalid weight {w}")));
            }
            p.weight = w;
        }
        Ok(self)
    }
}

/// Normalised copy of the ensemble's weights.
pub fn normalize_weights(ensemble: &Ensemble) -> Result<Vec<f64>> {
    normalize(&ensemble.weights())
}

/// Divides `weights` by their sum; fails when the sum is zero or not finite.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::DegenerateWeights("negative or NaN weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateWeights(format!("weight total {total}")));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}
