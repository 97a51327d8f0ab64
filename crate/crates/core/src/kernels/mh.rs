use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::TargetDensity;

use super::{MhConfig, StepOutcome};

/// Random-walk Metropolis step. The proposal is symmetric, so the acceptance
/// probability is `min(1, f(x') / f(x))`; proposals outside the target's box
/// have zero density.
pub fn mh_step(
    target: &TargetDensity,
    position: &[f64],
    config: &MhConfig,
    rng: &mut RandomSource,
) -> Result<StepOutcome> {
    if position.len() != target.dim() {
        return Err(Error::Dimension {
            expected: target.dim(),
            found: position.len(),
        });
    }
    let current = target.log_f(position);
    if !current.is_finite() || !target.contains(position) {
        return Err(Error::InvalidState(format!("log f = {current} at the current position")));
    }
    let sd = config.proposal_sd();
    let proposal: Vec<f64> = position.iter().map(|x| x + sd * rng.standard_normal()).collect();
    let proposed = if target.contains(&proposal) {
        target.log_f(&proposal)
    } else {
        f64::NEG_INFINITY
    };
    let u = rng.uniform_open();
    if proposed.is_nan() || proposed == f64::NEG_INFINITY {
        return Ok(StepOutcome::rejected(position, f64::NEG_INFINITY));
    }
    let log_a = (proposed - current).min(0.0);
    if u.ln() < log_a || log_a == 0.0 {
        Ok(StepOutcome {
            new_position: proposal,
            accepted: true,
            log_accept_prob: log_a,
        })
    } else {
        Ok(StepOutcome::rejected(position, log_a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::BoxConstraints;

    fn flat(dim: usize) -> TargetDensity {
        TargetDensity::from_fns(dim, |_| 0.0, |_, g| g.fill(0.0))
    }

    #[test]
    fn flat_target_accepts_everything() {
        let mut rng = RandomSource::new(1, 2);
        let cfg = MhConfig::new(1.0).unwrap();
        let mut x = vec![0.0, 0.0];
        for _ in 0..1000 {
            let out = mh_step(&flat(2), &x, &cfg, &mut rng).unwrap();
            assert!(out.accepted);
            assert_eq!(out.log_accept_prob, 0.0);
            x = out.new_position;
        }
    }

    #[test]
    fn invalid_start_is_an_error() {
        let t = TargetDensity::from_fns(1, |_| f64::NEG_INFINITY, |_, g| g.fill(0.0));
        let err = mh_step(&t, &[0.0], &MhConfig::new(1.0).unwrap(), &mut RandomSource::new(0, 0));
        assert!(matches!(err, Err(Error::InvalidState(_))));
    }

    #[test]
    fn box_exits_are_rejected() {
        let t = flat(1).with_constraints(BoxConstraints::cube(1, 0.0, 1.0).unwrap()).unwrap();
        let cfg = MhConfig::new(4.0).unwrap();
        let mut rng = RandomSource::new(3, 3);
        let mut x = vec![0.5];
        let mut rejected = 0;
        for _ in 0..500 {
            let out = mh_step(&t, &x, &cfg, &mut rng).unwrap();
            if !out.accepted {
                assert_eq!(out.new_position, x);
                assert_eq!(out.log_accept_prob, f64::NEG_INFINITY);
                rejected += 1;
            }
            x = out.new_position;
            assert!((0.0..=1.0).contains(&x[0]));
        }
        assert!(rejected > 300);
    }

    /// Quadrature oracle for `P(cell a -> cell b)` of a random walk with
    /// standard deviation `sd` started uniformly in cell `a` (unit cells).
    fn cross_probability(sd: f64, from: f64, to: f64) -> f64 {
        let n = 400;
        let h = 1.0 / n as f64;
        let simpson = |k: usize| if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let x = from + i as f64 * h;
                let y = to + j as f64 * h;
                let z = (y - x) / sd;
                let q = (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sd);
                total += simpson(i) * simpson(j) * q;
            }
        }
        total * h * h / 9.0
    }

    #[test]
    fn two_cell_detailed_balance() {
        // density a on [0, 1), b on [1, 2), zero elsewhere
        let (a, b) = (1.0f64, 3.0f64);
        let t = TargetDensity::from_fns(
            1,
            move |x| {
                if (0.0..1.0).contains(&x[0]) {
                    a.ln()
                } else if (1.0..2.0).contains(&x[0]) {
                    b.ln()
                } else {
                    f64::NEG_INFINITY
                }
            },
            |_, g| g.fill(0.0),
        );
        let cfg = MhConfig::new(1.0).unwrap();
        let p01 = cross_probability(1.0, 0.0, 1.0) * (b / a).min(1.0);
        let p10 = cross_probability(1.0, 1.0, 0.0) * (a / b).min(1.0);
        // stationary cell masses a/(a+b), b/(a+b) balance the flows exactly
        assert!((a * p01 - b * p10).abs() < 1e-12);

        let mut rng = RandomSource::new(11, 0);
        let mut x = vec![0.5];
        let (mut visits, mut moves) = ([0u64; 2], [0u64; 2]);
        for _ in 0..2_000_000 {
            let from = (x[0] >= 1.0) as usize;
            let out = mh_step(&t, &x, &cfg, &mut rng).unwrap();
            let to = (out.new_position[0] >= 1.0) as usize;
            visits[from] += 1;
            if from != to {
                moves[from] += 1;
            }
            x = out.new_position;
        }
        let est01 = moves[0] as f64 / visits[0] as f64;
        let est10 = moves[1] as f64 / visits[1] as f64;
        assert!((est01 - p01).abs() < 1e-3, "{est01} vs {p01}");
        assert!((est10 - p10).abs() < 1e-3, "{est10} vs {p10}");
        let pi0 = visits[0] as f64 / 2e6;
        assert!((pi0 * est01 - (1.0 - pi0) * est10).abs() < 1e-3);
    }
}
