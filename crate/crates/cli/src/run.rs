//! Builds samplers from a [`RunConfig`] and executes them.

use std::sync::Arc;

use anyhow::{bail, Context};
use hsmc::kernels::{run_chain, Chain, HmcConfig, Kernel, MhConfig};
use hsmc::smc::{
    annealing_sequence, blockwise_sequence, run_smc, tempering_sequence, BandwidthRule, BlockData,
    DiagonalGaussian, InitialDistribution, ResamplingScheme, SmcConfig, SmcOutput, TargetSequence, WeightMode,
};
use hsmc::targets::{dropwave, gaussian, rosenbrock, smiley};
use hsmc::{BoxConstraints, Purpose, StreamKey, TargetDensity};

use crate::config::{
    Algorithm, Bandwidth, KernelSpec, Resampling, RunConfig, SequenceSpec, TargetSpec, Weights,
};
use crate::data::{read_logit_file, read_points_file};

pub enum RunResult {
    Chain { chain: Chain, target: TargetDensity },
    Smc { output: SmcOutput, final_target: TargetDensity },
}

impl RunResult {
    /// The density plotted in `grid.csv`.
    pub fn target(&self) -> &TargetDensity {
        match self {
            RunResult::Chain { target, .. } => target,
            RunResult::Smc { final_target, .. } => final_target,
        }
    }
}

pub fn build_target(spec: &TargetSpec) -> anyhow::Result<TargetDensity> {
    Ok(match spec {
        TargetSpec::Rosenbrock => rosenbrock(),
        TargetSpec::Smiley => smiley(),
        TargetSpec::Dropwave => dropwave(),
        TargetSpec::Gaussian { mean, cov_diag } => gaussian(mean.clone(), cov_diag.clone())?,
    })
}

pub fn build_kernel(spec: &KernelSpec, dim: usize) -> anyhow::Result<Kernel> {
    Ok(match spec {
        KernelSpec::Hmc {
            mass_diag,
            leapfrog_steps,
            step_size,
        } => {
            let mass = mass_diag.clone().unwrap_or_else(|| vec![1.0; dim]);
            if mass.len() != dim {
                bail!("invalid config field `kernel.mass_diag`: has {} entries, target has dimension {dim}", mass.len());
            }
            HmcConfig::new(mass, *leapfrog_steps, *step_size)?.into()
        }
        KernelSpec::Mh { proposal_scale } => MhConfig::new(*proposal_scale)?.into(),
    })
}

fn constraints_box(bounds: &Option<(Vec<f64>, Vec<f64>)>) -> anyhow::Result<Option<BoxConstraints>> {
    bounds
        .as_ref()
        .map(|(l, u)| BoxConstraints::new(l.clone(), u.clone()).context("invalid config field `sequence.lower`"))
        .transpose()
}

/// Constraint box of the final stage, known before the sequence is built.
fn final_constraints(config: &RunConfig) -> anyhow::Result<Option<BoxConstraints>> {
    match config.sequence.as_ref().expect("validated") {
        SequenceSpec::Kde { constraints, .. } => constraints_box(constraints),
        SequenceSpec::Loglik { .. } => Ok(None),
        SequenceSpec::Tempering { .. } | SequenceSpec::Annealing { .. } => {
            let target = build_target(config.target.as_ref().expect("validated"))?;
            Ok(target.constraints().cloned())
        }
    }
}

pub fn build_initial(config: &RunConfig) -> anyhow::Result<Arc<dyn InitialDistribution>> {
    let spec = config.initial.as_ref().expect("validated");
    let mut init = DiagonalGaussian::new(spec.mean.clone(), spec.sd.clone())?;
    if spec.truncate {
        match final_constraints(config)? {
            Some(b) => {
                if b.dim() != spec.mean.len() {
                    bail!("invalid config field `initial.mean`: dimension {} does not match the constraints", spec.mean.len());
                }
                init = init.truncated(b)?;
            }
            None => bail!("invalid config field `initial.truncate`: the target has no constraint box"),
        }
    }
    Ok(Arc::new(init))
}

pub fn build_sequence(config: &RunConfig) -> anyhow::Result<TargetSequence> {
    let initial = build_initial(config)?;
    let dim = initial.dim();
    let seq = match config.sequence.as_ref().expect("validated") {
        SequenceSpec::Kde {
            data,
            block_size,
            bandwidth,
            constraints,
        } => {
            let points = read_points_file(data)?;
            if points[0].len() != dim {
                bail!(
                    "data file {} has {} columns but `initial.mean` has {dim} entries",
                    data.display(),
                    points[0].len()
                );
            }
            let bandwidth = match bandwidth {
                Bandwidth::ScaledRate => BandwidthRule::ScaledRate,
                Bandwidth::Fixed(h) => BandwidthRule::Fixed(h.clone()),
            };
            let data = BlockData::Kde {
                points,
                bandwidth,
                constraints: constraints_box(constraints)?,
            };
            blockwise_sequence(initial, &data, *block_size)?
        }
        SequenceSpec::Loglik { data, block_size, prior } => {
            let logit = read_logit_file(data)?;
            let seq = blockwise_sequence(initial, &BlockData::Loglik(logit), *block_size)?;
            if *prior {
                seq.with_initial_prior()?
            } else {
                seq
            }
        }
        SequenceSpec::Tempering { phis } => {
            let target = build_target(config.target.as_ref().expect("validated"))?;
            tempering_sequence(initial, target, phis)?
        }
        SequenceSpec::Annealing { gammas } => {
            let target = build_target(config.target.as_ref().expect("validated"))?;
            annealing_sequence(initial, target, gammas)?
        }
    };
    Ok(seq)
}

pub fn smc_config(config: &RunConfig, dim: usize, record_all: bool) -> anyhow::Result<SmcConfig> {
    let spec = config.smc.as_ref().expect("validated");
    let mut smc = SmcConfig::new(spec.n_particles, spec.n_groups, build_kernel(&config.kernel, dim)?);
    smc.mutation_steps = spec.mutation_steps;
    smc.weight_mode = match spec.weights {
        Weights::Theoretical => WeightMode::TheoreticalRatio,
        Weights::LooKde => WeightMode::LooKdeRatio,
    };
    smc.resampling = match spec.resampling {
        Resampling::Multinomial => ResamplingScheme::Multinomial,
        Resampling::Systematic => ResamplingScheme::Systematic,
    };
    smc.ess_threshold = spec.ess_threshold;
    smc.record_history = record_all;
    Ok(smc)
}

pub fn execute(config: &RunConfig, record_all: bool) -> anyhow::Result<RunResult> {
    match config.algorithm {
        Algorithm::Mh | Algorithm::Hmc => {
            let target = build_target(config.target.as_ref().expect("validated"))?;
            let chain = config.chain.as_ref().expect("validated");
            if chain.start.len() != target.dim() {
                bail!(
                    "invalid config field `chain.start`: has {} entries, target has dimension {}",
                    chain.start.len(),
                    target.dim()
                );
            }
            let kernel = build_kernel(&config.kernel, target.dim())?;
            let mut rng = StreamKey::new(config.seed, 0, 0).source(Purpose::Chain, 0);
            let chain = run_chain(&target, chain.start.clone(), &kernel, chain.iterations, &mut rng)?;
            Ok(RunResult::Chain { chain, target })
        }
        Algorithm::Smc | Algorithm::Hsmc => {
            let sequence = build_sequence(config)?;
            let smc = smc_config(config, sequence.dim(), record_all)?;
            let output = run_smc(&sequence, &smc, config.seed)?;
            let final_target = sequence.target(sequence.len()).clone();
            Ok(RunResult::Smc { output, final_target })
        }
    }
}
