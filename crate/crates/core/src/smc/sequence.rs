use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kde::{kde_target, scaled_rate_bandwidth};
use crate::rng::RandomSource;
use crate::target::{BoxConstraints, TargetDensity};
use crate::targets::{gaussian, geometric_bridge, nonlinear_logit_loglik, powered, product, LogitData};

/// The starting distribution of a run: a density plus an exact sampler.
pub trait InitialDistribution: Send + Sync {
    fn density(&self) -> &TargetDensity;
    fn sample(&self, rng: &mut RandomSource) -> Result<Vec<f64>>;

    fn dim(&self) -> usize {
        self.density().dim()
    }
}

const MAX_TRUNCATION_ATTEMPTS: usize = 1_000_000;

/// Independent normal coordinates, optionally truncated to a box by rejection.
#[derive(Clone, Debug)]
pub struct DiagonalGaussian {
    mean: Vec<f64>,
    sd: Vec<f64>,
    truncation: Option<BoxConstraints>,
    density: TargetDensity,
}

impl DiagonalGaussian {
    pub fn new(mean: Vec<f64>, sd: Vec<f64>) -> Result<Self> {
        if let Some(s) = sd.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::param("sd", format!("{s} is not positive")));
        }
        let var = sd.iter().map(|s| s * s).collect();
        let density = gaussian(mean.clone(), var)?;
        Ok(DiagonalGaussian {
            mean,
            sd,
            truncation: None,
            density,
        })
    }

    pub fn truncated(mut self, bounds: BoxConstraints) -> Result<Self> {
        self.density = self.density.with_constraints(bounds.clone())?;
        self.truncation = Some(bounds);
        Ok(self)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sd(&self) -> &[f64] {
        &self.sd
    }
}

impl InitialDistribution for DiagonalGaussian {
    fn density(&self) -> &TargetDensity {
        &self.density
    }

    fn sample(&self, rng: &mut RandomSource) -> Result<Vec<f64>> {
        for _ in 0..MAX_TRUNCATION_ATTEMPTS {
            let x: Vec<f64> = self
                .mean
                .iter()
                .zip(&self.sd)
                .map(|(m, s)| m + s * rng.standard_normal())
                .collect();
            if self.truncation.as_ref().is_none_or(|b| b.contains(&x)) {
                return Ok(x);
            }
        }
        Err(Error::InvalidState("truncated Gaussian: box has negligible mass".into()))
    }
}

/// `f_0, f_1, ..., f_T`.
#[derive(Clone)]
pub struct TargetSequence {
    initial: Arc<dyn InitialDistribution>,
    stages: Vec<TargetDensity>,
}

impl fmt::Debug for TargetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetSequence")
            .field("dim", &self.dim())
            .field("stages", &self.stages.len())
            .finish()
    }
}

impl TargetSequence {
    pub fn new(initial: Arc<dyn InitialDistribution>, stages: Vec<TargetDensity>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::param("stages", "need at least one stage"));
        }
        let dim = initial.dim();
        if let Some(s) = stages.iter().find(|s| s.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(TargetSequence { initial, stages })
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// Number of stages `T` (not counting `f_0`).
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn initial(&self) -> &dyn InitialDistribution {
        self.initial.as_ref()
    }

    pub fn stages(&self) -> &[TargetDensity] {
        &self.stages
    }

    /// Multiplies every stage by the initial density, turning likelihood
    /// stages into posteriors under an `f_0` prior.
    pub fn with_initial_prior(self) -> Result<Self> {
        let prior = self.initial.density().clone();
        let stages = self
            .stages
            .into_iter()
            .map(|s| product(s, prior.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TargetSequence {
            initial: self.initial,
            stages,
        })
    }

    /// `f_t` for `t` in `0..=T`.
    pub fn target(&self, t: usize) -> &TargetDensity {
        if t == 0 {
            self.initial.density()
        } else {
            &self.stages[t - 1]
        }
    }
}

/// Cumulative sizes `b, 2b, ..., n`; the last block may be short.
pub fn block_ends(n: usize, block_size: usize) -> Result<Vec<usize>> {
    if block_size == 0 {
        return Err(Error::param("block_size", "must be at least 1"));
    }
    if n == 0 {
        return Err(Error::param("data", "empty data set"));
    }
    let mut ends: Vec<usize> = (1..).map(|k| k * block_size).take_while(|e| *e < n).collect();
    ends.push(n);
    Ok(ends)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BandwidthRule {
    /// `sd * m^(-1/5)` over the `m` points revealed so far.
    ScaledRate,
    Fixed(Vec<f64>),
}

/// Data revealed block by block.
#[derive(Clone, Debug)]
pub enum BlockData {
    Kde {
        points: Vec<Vec<f64>>,
        bandwidth: BandwidthRule,
        constraints: Option<BoxConstraints>,
    },
    Loglik(LogitData),
}

/// Stage `t` is built from the first `t` blocks of `data`.
pub fn blockwise_sequence(
    initial: Arc<dyn InitialDistribution>,
    data: &BlockData,
    block_size: usize,
) -> Result<TargetSequence> {
    let stages = match data {
        BlockData::Kde {
            points,
            bandwidth,
            constraints,
        } => kde_blocks(points, block_size, bandwidth, constraints.as_ref())?,
        BlockData::Loglik(data) => loglik_blocks(data, block_size)?,
    };
    TargetSequence::new(initial, stages)
}

pub fn kde_blocks(
    points: &[Vec<f64>],
    block_size: usize,
    rule: &BandwidthRule,
    constraints: Option<&BoxConstraints>,
) -> Result<Vec<TargetDensity>> {
    block_ends(points.len(), block_size)?
        .into_iter()
        .map(|m| {
            let revealed = &points[..m];
            let h = match rule {
                BandwidthRule::ScaledRate => scaled_rate_bandwidth(revealed)?,
                BandwidthRule::Fixed(h) => h.clone(),
            };
            kde_target(revealed, h, constraints.cloned())
        })
        .collect()
}

pub fn loglik_blocks(data: &LogitData, block_size: usize) -> Result<Vec<TargetDensity>> {
    block_ends(data.len(), block_size)?
        .into_iter()
        .map(|m| nonlinear_logit_loglik(data.prefix(m)))
        .collect()
}

fn check_schedule(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param(name, "empty schedule"));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::param(name, "values must be positive and finite"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(name, "values must be strictly increasing"));
    }
    Ok(())
}

/// Stages `f^phi_t * f_1^(1 - phi_t)` where `f_1` is the initial density.
pub fn tempering_sequence(
    initial: Arc<dyn InitialDistribution>,
    f: TargetDensity,
    phis: &[f64],
) -> Result<TargetSequence> {
    check_schedule("phis", phis)?;
    if *phis.last().expect("non-empty") != 1.0 {
        return Err(Error::param("phis", "last value must be 1"));
    }
    let f1 = initial.density().clone();
    let stages = phis
        .iter()
        .map(|&phi| geometric_bridge(f1.clone(), f.clone(), phi))
        .collect::<Result<Vec<_>>>()?;
    TargetSequence::new(initial, stages)
}

/// Stages `f^gamma_t`.
pub fn annealing_sequence(
    initial: Arc<dyn InitialDistribution>,
    f: TargetDensity,
    gammas: &[f64],
) -> Result<TargetSequence> {
    check_schedule("gammas", gammas)?;
    let stages = gammas
        .iter()
        .map(|&g| powered(f.clone(), g))
        .collect::<Result<Vec<_>>>()?;
    TargetSequence::new(initial, stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::KdeModel;
    use crate::targets::{dropwave, simulate_logit_data};
    use crate::testing::random_points;
    use approx::assert_abs_diff_eq;

    fn standard_normal_start(dim: usize) -> Arc<dyn InitialDistribution> {
        Arc::new(DiagonalGaussian::new(vec![0.0; dim], vec![1.0; dim]).unwrap())
    }

    #[test]
    fn block_counts() {
        let smiley = block_ends(2048, 100).unwrap();
        assert_eq!(smiley.len(), 21);
        assert_eq!(smiley[20] - smiley[19], 48);
        let drop = block_ends(4096, 100).unwrap();
        assert_eq!(drop.len(), 41);
        assert_eq!(drop[40] - drop[39], 96);
        assert_eq!(block_ends(400, 50).unwrap().len(), 8);
        assert_eq!(block_ends(100, 100).unwrap(), vec![100]);
        assert!(block_ends(0, 10).is_err());
        assert!(block_ends(10, 0).is_err());
    }

    #[test]
    fn kde_stages_use_revealed_prefix() {
        let pts = random_points(250, &[-3.0, -3.0], &[3.0, 3.0], 4);
        let data = BlockData::Kde {
            points: pts.clone(),
            bandwidth: BandwidthRule::ScaledRate,
            constraints: None,
        };
        let seq = blockwise_sequence(standard_normal_start(2), &data, 100).unwrap();
        assert_eq!(seq.len(), 3);
        let h = scaled_rate_bandwidth(&pts[..200]).unwrap();
        let oracle = KdeModel::new(&pts[..200], h).unwrap();
        let x = [0.3, -0.7];
        assert_abs_diff_eq!(seq.target(2).log_f(&x), TargetDensity::new(oracle).log_f(&x), epsilon = 1e-13);
    }

    #[test]
    fn kde_stages_carry_constraints() {
        let pts = random_points(50, &[-2.0, -2.0], &[2.0, 2.0], 5);
        let bounds = BoxConstraints::cube(2, -2.5, 2.5).unwrap();
        let stages = kde_blocks(&pts, 20, &BandwidthRule::Fixed(vec![0.3, 0.3]), Some(&bounds)).unwrap();
        assert!(stages.iter().all(|s| s.constraints() == Some(&bounds)));
        assert_eq!(stages[2].log_f(&[3.0, 0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn loglik_stages() {
        let mut rng = RandomSource::new(8, 0);
        let data = simulate_logit_data(400, [3.0, 3.0], &mut rng).unwrap();
        let seq = blockwise_sequence(standard_normal_start(2), &BlockData::Loglik(data.clone()), 50).unwrap();
        assert_eq!(seq.len(), 8);
        let full = nonlinear_logit_loglik(data).unwrap();
        assert_eq!(seq.target(8).log_f(&[2.0, 3.5]), full.log_f(&[2.0, 3.5]));

        let posterior = seq.with_initial_prior().unwrap();
        let x = [2.0, 3.5];
        let prior = posterior.target(0).log_f(&x);
        assert_eq!(posterior.target(8).log_f(&x), full.log_f(&x) + prior);
        // the plateau at large beta_1 is no longer flat
        assert!(posterior.target(8).log_f(&[60.0, 0.0]) < full.log_f(&[60.0, 0.0]) - 60.0);
    }

    #[test]
    fn tempering_cases() {
        let f = dropwave();
        let start = standard_normal_start(2);
        let one = tempering_sequence(start.clone(), f.clone(), &[1.0]).unwrap();
        assert_eq!(one.len(), 1);
        let four = tempering_sequence(start.clone(), f.clone(), &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(four.len(), 4);
        for x in random_points(20, &[-2.0, -2.0], &[2.0, 2.0], 6) {
            assert_eq!(four.target(4).log_f(&x), f.log_f(&x));
            assert_eq!(one.target(1).log_f(&x), f.log_f(&x));
        }
        assert!(tempering_sequence(start.clone(), f.clone(), &[0.5, 0.4, 1.0]).is_err());
        assert!(tempering_sequence(start.clone(), f.clone(), &[0.5, 0.9]).is_err());
        assert!(tempering_sequence(start, f, &[-0.5, 1.0]).is_err());
    }

    #[test]
    fn annealing_gaussian_variances() {
        let f = gaussian(vec![0.0], vec![1.0]).unwrap();
        let seq = annealing_sequence(standard_normal_start(1), f.clone(), &[1.0, 4.0, 16.0, 64.0]).unwrap();
        for (t, gamma) in [1.0, 4.0, 16.0, 64.0].into_iter().enumerate() {
            let stage = seq.target(t + 1);
            // log density of N(0, 1/gamma) drops by gamma/2 at x = 1
            assert_abs_diff_eq!(stage.log_f(&[0.0]) - stage.log_f(&[1.0]), 0.5 * gamma, epsilon = 1e-12);
        }
        let identity = annealing_sequence(standard_normal_start(1), f.clone(), &[1.0]).unwrap();
        assert_eq!(identity.target(1).log_f(&[0.7]), f.log_f(&[0.7]));
        assert!(annealing_sequence(standard_normal_start(1), f.clone(), &[0.0, 1.0]).is_err());
        assert!(annealing_sequence(standard_normal_start(1), f, &[4.0, 1.0]).is_err());
    }

    #[test]
    fn truncated_gaussian_stays_inside() {
        let bounds = BoxConstraints::cube(2, -2.5, 2.5).unwrap();
        let init = DiagonalGaussian::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap().truncated(bounds.clone()).unwrap();
        let mut rng = RandomSource::new(3, 1);
        for _ in 0..500 {
            assert!(bounds.contains(&init.sample(&mut rng).unwrap()));
        }
        assert_eq!(init.density().log_f(&[3.0, 0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn sequence_dimension_checks() {
        assert!(TargetSequence::new(standard_normal_start(1), vec![dropwave()]).is_err());
        assert!(TargetSequence::new(standard_normal_start(2), vec![]).is_err());
    }
}
