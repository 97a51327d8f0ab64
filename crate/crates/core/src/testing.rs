//! Test oracles shared by the unit tests.

use crate::rng::RandomSource;
use crate::target::TargetDensity;

pub fn random_points(n: usize, low: &[f64], high: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RandomSource::new(seed, 0xfd);
    (0..n)
        .map(|_| low.iter().zip(high).map(|(l, h)| rng.uniform_range(*l, *h)).collect())
        .collect()
}

/// Central differences with a step scaled to the coordinate.
pub fn finite_difference_gradient(target: &TargetDensity, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|d| {
            let h = 1e-6 * x[d].abs().max(1.0);
            probe[d] = x[d] + h;
            let up = target.log_f(&probe);
            probe[d] = x[d] - h;
            let down = target.log_f(&probe);
            probe[d] = x[d];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Max-norm error relative to `max(1, |grad|)`.
pub fn gradient_error(target: &TargetDensity, x: &[f64]) -> f64 {
    let analytic = target.grad_log_f(x);
    let numeric = finite_difference_gradient(target, x);
    let scale = analytic.iter().fold(1.0f64, |m, g| m.max(g.abs()));
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn assert_gradient_matches(target: &TargetDensity, points: &[Vec<f64>]) {
    for p in points {
        let err = gradient_error(target, p);
        assert!(err < 1e-5, "gradient error {err:e} at {p:?}");
    }
}
