//! Sequential Monte Carlo engines: standard SMC with theoretical ratio
//! weights and HSMC with leave-one-out KDE weights.

mod engine;
mod groups;
mod resample;
mod sequence;
mod weights;

pub use engine::{initial_ensemble, run_smc, run_smc_from, IterationRecord, RunReport, SmcConfig, SmcOutput, Snapshot};
pub use groups::compare_groups;
pub use resample::{resample, ResamplingScheme};
pub use sequence::{
    annealing_sequence, block_ends, blockwise_sequence, kde_blocks, loglik_blocks, tempering_sequence,
    BandwidthRule, BlockData, DiagonalGaussian, InitialDistribution, TargetSequence,
};
pub use weights::{correction_log_weights, correction_weights, exp_normalized, WeightMode};
