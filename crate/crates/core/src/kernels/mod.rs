//! Single-step Markov transition kernels.

mod chain;
mod hmc;
mod mh;
mod mutate;

pub use chain::{run_chain, Chain};
pub use hmc::{hamiltonian, hmc_step, kinetic_energy, leapfrog, reflect_into_box};
pub use mh::mh_step;
pub use mutate::{mutate_ensemble, Mutation};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::TargetDensity;

/// Leapfrog tuning: diagonal mass `M`, step count `L` and step size `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct HmcConfig {
    mass_diag: Vec<f64>,
    leapfrog_steps: usize,
    step_size: f64,
}

impl HmcConfig {
    pub fn new(mass_diag: Vec<f64>, leapfrog_steps: usize, step_size: f64) -> Result<Self> {
        if mass_diag.is_empty() {
            return Err(Error::param("mass_diag", "empty"));
        }
        if let Some(m) = mass_diag.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::param("mass_diag", format!("component {m} is not positive")));
        }
        if leapfrog_steps == 0 {
            return Err(Error::param("leapfrog_steps", "must be at least 1"));
        }
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(Error::param("step_size", format!("must be positive, got {step_size}")));
        }
        Ok(HmcConfig {
            mass_diag,
            leapfrog_steps,
            step_size,
        })
    }

    /// Identity mass in `dim` dimensions.
    pub fn identity(dim: usize, leapfrog_steps: usize, step_size: f64) -> Result<Self> {
        Self::new(vec![1.0; dim], leapfrog_steps, step_size)
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    pub fn leapfrog_steps(&self) -> usize {
        self.leapfrog_steps
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn dim(&self) -> usize {
        self.mass_diag.len()
    }
}

/// Random-walk proposal `N(x, sigma I)`: `proposal_scale` is the variance
/// multiplier `sigma`, so each coordinate moves with standard deviation
/// `sqrt(sigma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MhConfig {
    proposal_scale: f64,
}

impl MhConfig {
    pub fn new(proposal_scale: f64) -> Result<Self> {
        if !(proposal_scale > 0.0 && proposal_scale.is_finite()) {
            return Err(Error::param(
                "proposal_scale",
                format!("must be positive, got {proposal_scale}"),
            ));
        }
        Ok(MhConfig { proposal_scale })
    }

    pub fn proposal_scale(&self) -> f64 {
        self.proposal_scale
    }

    pub fn proposal_sd(&self) -> f64 {
        self.proposal_scale.sqrt()
    }
}

/// Result of one accept/reject step. A rejected step returns the input
/// position unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub new_position: Vec<f64>,
    pub accepted: bool,
    /// `min(0, log a)`; `-inf` for auto-rejected proposals.
    pub log_accept_prob: f64,
}

impl StepOutcome {
    pub(crate) fn rejected(position: &[f64], log_accept_prob: f64) -> Self {
        StepOutcome {
            new_position: position.to_vec(),
            accepted: false,
            log_accept_prob,
        }
    }
}

/// The mutation kernel used by a sampler.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Hmc(HmcConfig),
    Mh(MhConfig),
}

impl Kernel {
    pub fn step(&self, target: &TargetDensity, position: &[f64], rng: &mut RandomSource) -> Result<StepOutcome> {
        match self {
            Kernel::Hmc(c) => hmc_step(target, position, c, rng),
            Kernel::Mh(c) => mh_step(target, position, c, rng),
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Kernel::Hmc(c) if c.dim() != dim => Err(Error::Dimension {
                expected: dim,
                found: c.dim(),
            }),
            _ => Ok(()),
        }
    }
}

impl From<HmcConfig> for Kernel {
    fn from(c: HmcConfig) -> Self {
        Kernel::Hmc(c)
    }
}

impl From<MhConfig> for Kernel {
    fn from(c: MhConfig) -> Self {
        Kernel::Mh(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(HmcConfig::new(vec![1.0, 0.0], 20, 0.05).is_err());
        assert!(HmcConfig::new(vec![1.0], 0, 0.05).is_err());
        assert!(matches!(
            HmcConfig::new(vec![1.0], 20, -1.0),
            Err(Error::Parameter { name: "step_size", .. })
        ));
        assert!(MhConfig::new(0.0).is_err());
        assert_eq!(MhConfig::new(0.25).unwrap().proposal_sd(), 0.5);
    }
}
