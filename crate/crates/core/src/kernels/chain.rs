use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::TargetDensity;

use super::Kernel;

/// A single Markov chain path.
#[derive(Clone, Debug)]
pub struct Chain {
    /// `iterations + 1` states, starting with the initial position.
    pub path: Vec<Vec<f64>>,
    pub accepted: Vec<bool>,
    pub acceptance_count: usize,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_count as f64 / self.accepted.len().max(1) as f64
    }

    /// First iteration at which `pred` holds for the state, if any.
    pub fn first_hit(&self, pred: impl Fn(&[f64]) -> bool) -> Option<usize> {
        self.path.iter().position(|x| pred(x))
    }
}

pub fn run_chain(
    target: &TargetDensity,
    start: Vec<f64>,
    kernel: &Kernel,
    iterations: usize,
    rng: &mut RandomSource,
) -> Result<Chain> {
    if start.len() != target.dim() {
        return Err(Error::Dimension {
            expected: target.dim(),
            found: start.len(),
        });
    }
    kernel.check_dim(target.dim())?;
    let mut path = Vec::with_capacity(iterations + 1);
    let mut accepted = Vec::with_capacity(iterations);
    path.push(start);
    for _ in 0..iterations {
        let out = kernel.step(target, path.last().expect("non-empty"), rng)?;
        accepted.push(out.accepted);
        path.push(out.new_position);
    }
    let acceptance_count = accepted.iter().filter(|a| **a).count();
    Ok(Chain {
        path,
        accepted,
        acceptance_count,
    })
}
