//! Exact data generation by rejection against a uniform envelope.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::{BoxConstraints, TargetDensity};

use super::{dropwave, smiley};

/// Each smiley term is at most exp(0) = 1, so `g <= 3`.
pub const SMILEY_LOG_ENVELOPE: f64 = 1.098_612_288_668_109_8; // ln 3

/// `cos + 1 <= 2` and `r^2 + 2 >= 2`, so `log g <= 1`.
pub const DROPWAVE_LOG_ENVELOPE: f64 = 1.0;

/// Sampling box for the smiley density. Outside it each term is below
/// `exp(-20)` of its peak.
pub const SMILEY_BOUNDS: ([f64; 2], [f64; 2]) = ([-13.0, -45.0], [13.0, 110.0]);

const MAX_ATTEMPTS_PER_DRAW: usize = 1_000_000;

/// Draws `n` points from `exp(log_f)` restricted to `bounds`, where
/// `log_envelope` must bound `log_f` from above on the box.
pub fn rejection_sample(
    target: &TargetDensity,
    bounds: &BoxConstraints,
    log_envelope: f64,
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one draw"));
    }
    if bounds.dim() != target.dim() {
        return Err(Error::Dimension {
            expected: target.dim(),
            found: bounds.dim(),
        });
    }
    if bounds.lower().iter().chain(bounds.upper()).any(|b| !b.is_finite()) {
        return Err(Error::param("bounds", "rejection sampling needs a bounded box"));
    }
    let mut out = Vec::with_capacity(n);
    let mut candidate = vec![0.0; target.dim()];
    while out.len() < n {
        let mut attempts = 0;
        loop {
            for (d, c) in candidate.iter_mut().enumerate() {
                *c = rng.uniform_range(bounds.lower()[d], bounds.upper()[d]);
            }
            let log_f = target.log_f(&candidate);
            if log_f > log_envelope + 1e-12 {
                return Err(Error::InvalidState(format!(
                    "envelope {log_envelope} violated: log f = {log_f} at {candidate:?}"
                )));
            }
            if rng.uniform_open().ln() < log_f - log_envelope {
                out.push(candidate.clone());
                break;
            }
            attempts += 1;
            if attempts >= MAX_ATTEMPTS_PER_DRAW {
                return Err(Error::InvalidState("rejection sampler is not accepting".into()));
            }
        }
    }
    Ok(out)
}

pub fn smiley_sample(n: usize, rng: &mut RandomSource) -> Result<Vec<Vec<f64>>> {
    let bounds = BoxConstraints::new(SMILEY_BOUNDS.0.to_vec(), SMILEY_BOUNDS.1.to_vec())?;
    rejection_sample(&smiley(), &bounds, SMILEY_LOG_ENVELOPE, n, rng)
}

pub fn dropwave_sample(n: usize, rng: &mut RandomSource) -> Result<Vec<Vec<f64>>> {
    let target = dropwave();
    let bounds = target.constraints().cloned().expect("dropwave is constrained");
    rejection_sample(&target, &bounds, DROPWAVE_LOG_ENVELOPE, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{smiley_components, SMILEY_MODES};

    #[test]
    fn envelopes_hold_on_a_fine_grid() {
        let s = smiley();
        let d = dropwave();
        let mut max_s = f64::NEG_INFINITY;
        let mut max_d = f64::NEG_INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let x = -13.0 + 26.0 * i as f64 / 400.0;
                let y = -45.0 + 155.0 * j as f64 / 400.0;
                max_s = max_s.max(s.log_f(&[x, y]));
                let (u, v) = (-2.5 + 5.0 * i as f64 / 400.0, -2.5 + 5.0 * j as f64 / 400.0);
                max_d = max_d.max(d.log_f(&[u, v]));
            }
        }
        assert!(max_s <= SMILEY_LOG_ENVELOPE);
        assert!(max_d <= DROPWAVE_LOG_ENVELOPE);
    }

    #[test]
    fn smiley_box_edges_are_negligible() {
        for t in 0..=200 {
            let s = t as f64 / 200.0;
            let edges = [
                [-13.0, -45.0 + 155.0 * s],
                [13.0, -45.0 + 155.0 * s],
                [-13.0 + 26.0 * s, -45.0],
                [-13.0 + 26.0 * s, 110.0],
            ];
            for e in edges {
                for (a, _) in smiley_components(e[0], e[1]) {
                    assert!(a < -20.0, "{e:?} has exponent {a}");
                }
            }
        }
    }

    #[test]
    fn dropwave_draws_inside_the_box() {
        let pts = dropwave_sample(4096, &mut RandomSource::new(1, 0)).unwrap();
        assert_eq!(pts.len(), 4096);
        assert!(pts.iter().all(|p| p.iter().all(|v| (-2.5..=2.5).contains(v))));
    }

    #[test]
    fn smiley_draws_follow_the_components() {
        let pts = smiley_sample(2048, &mut RandomSource::new(2, 0)).unwrap();
        assert_eq!(pts.len(), 2048);
        // nearest component by exponent; each eye carries ~27% of the mass, the mouth ~45%
        let mut counts = [0usize; 3];
        for p in &pts {
            let c = smiley_components(p[0], p[1]);
            let k = (0..3).max_by(|&a, &b| c[a].0.total_cmp(&c[b].0)).unwrap();
            counts[k] += 1;
        }
        let eye = (5.0 * std::f64::consts::PI / 6.0).sqrt() / 1.5;
        let mouth = std::f64::consts::PI.sqrt();
        let expected = [eye / (2.0 * eye + mouth), eye / (2.0 * eye + mouth), mouth / (2.0 * eye + mouth)];
        for k in 0..3 {
            let f = counts[k] as f64 / 2048.0;
            assert!((f - expected[k]).abs() < 0.04, "component {k}: {f} vs {}", expected[k]);
        }
        assert_eq!(SMILEY_MODES.len(), 3);
    }

    #[test]
    fn zero_draws_rejected() {
        assert!(dropwave_sample(0, &mut RandomSource::new(0, 0)).is_err());
    }
}
