use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{effective_sample_size, weighted_moments};
use crate::ensemble::{normalize, Ensemble, Particle};
use crate::error::{Error, Result};
use crate::kernels::{mutate_ensemble, Kernel};
use crate::rng::{Purpose, StreamKey};

use super::resample::{resample, ResamplingScheme};
use super::sequence::TargetSequence;
use super::weights::{correction_log_weights, exp_normalized, WeightMode};

#[derive(Clone, Debug)]
pub struct SmcConfig {
    pub n_particles: usize,
    pub n_groups: usize,
    pub kernel: Kernel,
    pub mutation_steps: usize,
    pub weight_mode: WeightMode,
    pub resampling: ResamplingScheme,
    /// Resample only when ESS < threshold * N. `None` resamples every iteration.
    pub ess_threshold: Option<f64>,
    /// Keep every iteration's ensemble, not just the last.
    pub record_history: bool,
}

impl SmcConfig {
    pub fn new(n_particles: usize, n_groups: usize, kernel: impl Into<Kernel>) -> Self {
        SmcConfig {
            n_particles,
            n_groups,
            kernel: kernel.into(),
            mutation_steps: 1,
            weight_mode: WeightMode::default(),
            resampling: ResamplingScheme::default(),
            ess_threshold: None,
            record_history: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::param("n_particles", "need at least 2"));
        }
        if self.n_groups < 1 {
            return Err(Error::param("n_groups", "need at least 1"));
        }
        if self.mutation_steps < 1 {
            return Err(Error::param("mutation_steps", "need at least 1"));
        }
        if let Some(t) = self.ess_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::param("ess_threshold", "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Diagnostics for one (group, iteration) cell. Iteration 0 describes the
/// initial draws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub group: usize,
    pub iteration: usize,
    pub acceptance_count: usize,
    pub ess: f64,
    /// Extremes of the normalised correction weights.
    pub weight_min: f64,
    pub weight_max: f64,
    pub resampled: bool,
    /// Correction-weighted mean before selection.
    pub weighted_mean: Vec<f64>,
    /// Mean right after selection.
    pub selected_mean: Vec<f64>,
    /// Mean and diagonal covariance after mutation.
    pub sample_mean: Vec<f64>,
    pub sample_cov_diag: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub n_particles: usize,
    pub n_groups: usize,
    pub n_stages: usize,
    pub mutation_steps: usize,
    /// Ordered by group, then iteration.
    pub iterations: Vec<IterationRecord>,
}

impl RunReport {
    pub fn group(&self, group: usize) -> impl Iterator<Item = &IterationRecord> {
        self.iterations.iter().filter(move |r| r.group == group)
    }

    pub fn final_record(&self, group: usize) -> Option<&IterationRecord> {
        self.group(group).last()
    }
}

/// An ensemble as it stood at the end of an iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub ensemble: Ensemble,
    /// Whether each particle accepted at least one mutation proposal.
    pub accepted: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct SmcOutput {
    pub report: RunReport,
    /// Per group: every iteration when `record_history` is set, otherwise
    /// just the final one.
    pub snapshots: Vec<Vec<Snapshot>>,
}

impl SmcOutput {
    pub fn final_ensembles(&self) -> Vec<&Ensemble> {
        self.snapshots
            .iter()
            .map(|s| &s.last().expect("at least one snapshot").ensemble)
            .collect()
    }
}

/// Runs `config.n_groups` independent groups. Group `g` draws its initial
/// particles from stream `(seed, g, 0, Initial, n)`.
pub fn run_smc(sequence: &TargetSequence, config: &SmcConfig, seed: u64) -> Result<SmcOutput> {
    config.validate()?;
    let initial = (0..config.n_groups)
        .into_par_iter()
        .map(|g| initial_ensemble(sequence, config.n_particles, seed, g))
        .collect::<Vec<_>>();
    let initial = initial.into_iter().collect::<Result<Vec<_>>>()?;
    run_smc_from(sequence, config, seed, initial)
}

pub fn initial_ensemble(sequence: &TargetSequence, n: usize, seed: u64, group: usize) -> Result<Ensemble> {
    let key = StreamKey::new(seed, group, 0);
    let draws = (0..n)
        .into_par_iter()
        .map(|i| sequence.initial().sample(&mut key.source(Purpose::Initial, i)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| abort(0, group, e))?;
    let particles = draws.into_iter().map(Particle::new).collect();
    Ensemble::new(particles, 0, group)
}

/// Like [`run_smc`] but starting from the given ensembles, one per group.
pub fn run_smc_from(
    sequence: &TargetSequence,
    config: &SmcConfig,
    seed: u64,
    initial: Vec<Ensemble>,
) -> Result<SmcOutput> {
    config.validate()?;
    if initial.len() != config.n_groups {
        return Err(Error::param("initial", "need one ensemble per group"));
    }
    if let Some(e) = initial.iter().find(|e| e.dim() != sequence.dim()) {
        return Err(Error::Dimension {
            expected: sequence.dim(),
            found: e.dim(),
        });
    }
    let results: Vec<Result<(Vec<IterationRecord>, Vec<Snapshot>)>> = initial
        .into_par_iter()
        .enumerate()
        .map(|(g, e)| run_group(sequence, config, seed, g, e.with_group(g).with_iteration(0)))
        .collect();

    let mut iterations = Vec::new();
    let mut snapshots = Vec::with_capacity(config.n_groups);
    for r in results {
        let (records, snaps) = r?;
        iterations.extend(records);
        snapshots.push(snaps);
    }
    Ok(SmcOutput {
        report: RunReport {
            n_particles: config.n_particles,
            n_groups: config.n_groups,
            n_stages: sequence.len(),
            mutation_steps: config.mutation_steps,
            iterations,
        },
        snapshots,
    })
}

fn abort(stage: usize, group: usize, e: Error) -> Error {
    Error::Aborted {
        stage,
        group,
        source: Box::new(e),
    }
}

fn run_group(
    sequence: &TargetSequence,
    config: &SmcConfig,
    seed: u64,
    group: usize,
    mut ensemble: Ensemble,
) -> Result<(Vec<IterationRecord>, Vec<Snapshot>)> {
    let n = ensemble.len();
    let mut records = Vec::with_capacity(sequence.len() + 1);
    let mut snapshots = Vec::new();

    let start = weighted_moments(&ensemble).map_err(|e| abort(0, group, e))?;
    let w0 = normalize(&ensemble.weights()).map_err(|e| abort(0, group, e))?;
    records.push(IterationRecord {
        group,
        iteration: 0,
        acceptance_count: 0,
        ess: start.n_effective,
        weight_min: w0.iter().copied().fold(f64::INFINITY, f64::min),
        weight_max: w0.iter().copied().fold(0.0, f64::max),
        resampled: false,
        weighted_mean: start.mean.clone(),
        selected_mean: start.mean.clone(),
        sample_mean: start.mean,
        sample_cov_diag: start.covariance_diag,
    });
    let mut snapshot = Snapshot {
        accepted: vec![false; n],
        ensemble: ensemble.clone(),
    };

    for t in 1..=sequence.len() {
        if config.record_history {
            snapshots.push(snapshot);
        }
        let fail = |e| abort(t, group, e);
        let f_next = sequence.target(t);
        let log_w = correction_log_weights(&ensemble, f_next, sequence.target(t - 1), config.weight_mode)
            .map_err(fail)?;
        let raw = exp_normalized(&log_w).map_err(fail)?;
        let ess = effective_sample_size(&raw).map_err(fail)?;
        let w = normalize(&raw).map_err(fail)?;
        let weighted = ensemble.clone().with_weights(&w).map_err(fail)?;
        let weighted_mean = weighted_moments(&weighted).map_err(fail)?.mean;

        let key = StreamKey::new(seed, group, t);
        let do_resample = config.ess_threshold.is_none_or(|thr| ess < thr * n as f64);
        let selected = if do_resample {
            resample(&ensemble, &w, config.resampling, &mut key.source(Purpose::Selection, 0)).map_err(fail)?
        } else {
            let scaled: Vec<f64> = w.iter().map(|x| x * n as f64).collect();
            ensemble.clone().with_weights(&scaled).map_err(fail)?
        };
        let selected_mean = weighted_moments(&selected).map_err(fail)?.mean;

        let mutation =
            mutate_ensemble(f_next, &selected, &config.kernel, config.mutation_steps, key).map_err(fail)?;
        ensemble = mutation.ensemble.with_iteration(t);
        let after = weighted_moments(&ensemble).map_err(fail)?;

        records.push(IterationRecord {
            group,
            iteration: t,
            acceptance_count: mutation.acceptance_count,
            ess,
            weight_min: w.iter().copied().fold(f64::INFINITY, f64::min),
            weight_max: w.iter().copied().fold(0.0, f64::max),
            resampled: do_resample,
            weighted_mean,
            selected_mean,
            sample_mean: after.mean,
            sample_cov_diag: after.covariance_diag,
        });
        snapshot = Snapshot {
            accepted: mutation.moved,
            ensemble: ensemble.clone(),
        };
    }
    snapshots.push(snapshot);
    Ok((records, snapshots))
}
