use rayon::prelude::*;

use crate::ensemble::{Ensemble, Particle};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamKey};
use crate::target::TargetDensity;

use super::Kernel;

#[derive(Clone, Debug)]
pub struct Mutation {
    pub ensemble: Ensemble,
    /// Accepted proposals summed over particles and steps.
    pub acceptance_count: usize,
    /// Whether each particle accepted at least one proposal.
    pub moved: Vec<bool>,
}

/// Advances every particle by `steps` kernel steps targeting `target`.
///
/// Particle `n` draws from the stream `key.source(Mutation, n)`, so the result
/// does not depend on the number of worker threads. A particle whose kernel
/// step fails (e.g. it sits at zero density) simply stays put.
pub fn mutate_ensemble(
    target: &TargetDensity,
    ensemble: &Ensemble,
    kernel: &Kernel,
    steps: usize,
    key: StreamKey,
) -> Result<Mutation> {
    if steps == 0 {
        return Err(Error::param("mutation_steps", "must be at least 1"));
    }
    if ensemble.dim() != target.dim() {
        return Err(Error::Dimension {
            expected: target.dim(),
            found: ensemble.dim(),
        });
    }
    kernel.check_dim(target.dim())?;

    let moved: Vec<(Particle, usize)> = ensemble
        .particles()
        .par_iter()
        .enumerate()
        .map(|(n, particle)| {
            let mut rng = key.source(Purpose::Mutation, n);
            let mut position = particle.position.clone();
            let mut accepted = 0;
            for _ in 0..steps {
                match kernel.step(target, &position, &mut rng) {
                    Ok(out) => {
                        if out.accepted {
                            accepted += 1;
                            position = out.new_position;
                        }
                    }
                    Err(_) => break,
                }
            }
            (
                Particle {
                    position,
                    weight: particle.weight,
                },
                accepted,
            )
        })
        .collect();

    let acceptance_count = moved.iter().map(|(_, a)| a).sum();
    let flags = moved.iter().map(|(_, a)| *a > 0).collect();
    let particles = moved.into_iter().map(|(p, _)| p).collect();
    Ok(Mutation {
        ensemble: Ensemble::new(particles, ensemble.iteration(), ensemble.group())?,
        acceptance_count,
        moved: flags,
    })
}
