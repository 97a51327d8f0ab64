use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::TargetDensity;

use super::{HmcConfig, StepOutcome};

/// Maximum folds before a coordinate is declared lost.
const MAX_FOLDS: usize = 10_000;

/// Folds a coordinate back into `[lower, upper]`, flipping the momentum at
/// every wall it crosses.
pub fn reflect_into_box(position: f64, momentum: f64, lower: f64, upper: f64) -> Result<(f64, f64)> {
    if !position.is_finite() || !momentum.is_finite() || lower.is_nan() || upper.is_nan() {
        return Err(Error::Numeric(format!("reflect({position}, {momentum}, [{lower}, {upper}])")));
    }
    if lower >= upper {
        return Err(Error::param("constraints", format!("empty interval [{lower}, {upper}]")));
    }
    let (mut x, mut p) = (position, momentum);
    let mut folds = 0;
    loop {
        if x > upper {
            x = upper - (x - upper);
            p = -p;
        } else if x < lower {
            x = lower + (lower - x);
            p = -p;
        } else {
            return Ok((x, p));
        }
        folds += 1;
        if folds > MAX_FOLDS {
            return Err(Error::Numeric(format!("{position} is too far outside [{lower}, {upper}]")));
        }
    }
}

/// `K(p) = p^T M^-1 p / 2` for diagonal `M`.
pub fn kinetic_energy(momentum: &[f64], mass_diag: &[f64]) -> f64 {
    0.5 * momentum.iter().zip(mass_diag).map(|(p, m)| p * p / m).sum::<f64>()
}

/// `H = U + K = -log f + K`.
pub fn hamiltonian(target: &TargetDensity, position: &[f64], momentum: &[f64], mass_diag: &[f64]) -> f64 {
    -target.log_f(position) + kinetic_energy(momentum, mass_diag)
}

/// Integrates `L` leapfrog steps in place and returns the final log-density,
/// or `None` if the trajectory hit a non-finite density or gradient (or could
/// not be reflected back into the box).
pub fn leapfrog(
    target: &TargetDensity,
    position: &mut [f64],
    momentum: &mut [f64],
    config: &HmcConfig,
) -> Option<f64> {
    let eps = config.step_size();
    let mass = config.mass_diag();
    let bounds = target.constraints();
    let mut grad = vec![0.0; position.len()];
    let mut log_f = target.log_f_and_grad(position, &mut grad);
    if !finite(log_f, &grad) {
        return None;
    }
    for (p, g) in momentum.iter_mut().zip(&grad) {
        *p += 0.5 * eps * g;
    }
    let steps = config.leapfrog_steps();
    for l in 1..=steps {
        for d in 0..position.len() {
            position[d] += eps * momentum[d] / mass[d];
            if let Some(b) = bounds.filter(|b| b.is_constrained(d)) {
                let (x, p) = reflect_into_box(position[d], momentum[d], b.lower()[d], b.upper()[d]).ok()?;
                position[d] = x;
                momentum[d] = p;
            }
        }
        log_f = target.log_f_and_grad(position, &mut grad);
        if !finite(log_f, &grad) {
            return None;
        }
        if l != steps {
            for (p, g) in momentum.iter_mut().zip(&grad) {
                *p += eps * g;
            }
        }
    }
    for (p, g) in momentum.iter_mut().zip(&grad) {
        *p += 0.5 * eps * g;
    }
    Some(log_f)
}

fn finite(log_f: f64, grad: &[f64]) -> bool {
    log_f.is_finite() && grad.iter().all(|g| g.is_finite())
}

/// One Hamiltonian Monte Carlo step with momentum `p ~ N(0, M)`.
///
/// Targets with box constraints reflect off the walls inside every position
/// update. Trajectories that meet a non-finite density are rejected.
pub fn hmc_step(
    target: &TargetDensity,
    position: &[f64],
    config: &HmcConfig,
    rng: &mut RandomSource,
) -> Result<StepOutcome> {
    let dim = target.dim();
    if position.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: position.len(),
        });
    }
    if config.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: config.dim(),
        });
    }
    let mut grad = vec![0.0; dim];
    let current = target.log_f_and_grad(position, &mut grad);
    if !finite(current, &grad) {
        return Err(Error::InvalidState(format!("log f = {current} at the current position")));
    }
    let mass = config.mass_diag();
    let momentum: Vec<f64> = mass.iter().map(|m| m.sqrt() * rng.standard_normal()).collect();
    let u = rng.uniform_open();

    let mut proposal = position.to_vec();
    let mut p = momentum.clone();
    let Some(proposed) = leapfrog(target, &mut proposal, &mut p, config) else {
        return Ok(StepOutcome::rejected(position, f64::NEG_INFINITY));
    };
    p.iter_mut().for_each(|v| *v = -*v);

    // U(x) - U(x') + K(p) - K(p')
    let log_a = proposed - current + kinetic_energy(&momentum, mass) - kinetic_energy(&p, mass);
    if log_a.is_nan() {
        return Ok(StepOutcome::rejected(position, f64::NEG_INFINITY));
    }
    let log_a = log_a.min(0.0);
    if log_a == 0.0 || u.ln() < log_a {
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
    use crate::targets::{gaussian, rosenbrock};
    use approx::assert_abs_diff_eq;

    fn flat(dim: usize) -> TargetDensity {
        TargetDensity::from_fns(dim, |_| 0.0, |_, g| g.fill(0.0))
    }

    #[test]
    fn folds() {
        let (x, p) = reflect_into_box(2.7, 1.0, f64::NEG_INFINITY, 2.5).unwrap();
        assert_abs_diff_eq!(x, 2.3, epsilon = 1e-12);
        assert_eq!(p, -1.0);
        assert_eq!(reflect_into_box(0.4, 0.7, 0.0, 1.0).unwrap(), (0.4, 0.7));
        let (x, p) = reflect_into_box(2.3, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-12);
        assert_eq!(p, 1.0);
        let (x, p) = reflect_into_box(-0.25, -2.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.25, epsilon = 1e-12);
        assert_eq!(p, 2.0);
        assert!(matches!(reflect_into_box(f64::NAN, 1.0, 0.0, 1.0), Err(Error::Numeric(_))));
        assert!(reflect_into_box(f64::INFINITY, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn reflection_preserves_speed() {
        let mut rng = RandomSource::new(4, 4);
        for _ in 0..10_000 {
            let x = rng.uniform_range(-10.0, 10.0);
            let p = rng.standard_normal() * 3.0;
            let (_, q) = reflect_into_box(x, p, -1.0, 2.0).unwrap();
            assert_eq!(p.abs(), q.abs());
        }
    }

    #[test]
    fn flat_target_drifts_ballistically() {
        let cfg = HmcConfig::new(vec![1.0, 4.0], 10, 0.1).unwrap();
        let key_seed = 9;
        let mut rng = RandomSource::new(key_seed, 1);
        let out = hmc_step(&flat(2), &[0.0, 0.0], &cfg, &mut rng).unwrap();
        let mut replay = RandomSource::new(key_seed, 1);
        let p = [replay.standard_normal(), 2.0 * replay.standard_normal()];
        assert!(out.accepted);
        assert_eq!(out.log_accept_prob, 0.0);
        assert_abs_diff_eq!(out.new_position[0], 10.0 * 0.1 * p[0], epsilon = 1e-12);
        assert_abs_diff_eq!(out.new_position[1], 10.0 * 0.1 * p[1] / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_error_is_small() {
        let t = gaussian(vec![0.0], vec![1.0]).unwrap();
        let cfg = HmcConfig::identity(1, 10, 0.01).unwrap();
        let mut rng = RandomSource::new(5, 5);
        for _ in 0..1000 {
            let x = vec![rng.standard_normal()];
            let p = vec![rng.standard_normal()];
            let h0 = hamiltonian(&t, &x, &p, cfg.mass_diag());
            let (mut x1, mut p1) = (x.clone(), p.clone());
            leapfrog(&t, &mut x1, &mut p1, &cfg).unwrap();
            assert!((hamiltonian(&t, &x1, &p1, cfg.mass_diag()) - h0).abs() < 1e-3);
        }
    }

    #[test]
    fn reversibility() {
        let cfg = HmcConfig::new(vec![1.0, 0.5], 20, 0.05).unwrap();
        let t = rosenbrock();
        let mut rng = RandomSource::new(6, 6);
        for _ in 0..200 {
            let x0 = vec![rng.uniform_range(-2.0, 2.0), rng.uniform_range(-1.0, 4.0)];
            let p0 = vec![rng.standard_normal(), rng.standard_normal()];
            let (mut x, mut p) = (x0.clone(), p0.clone());
            leapfrog(&t, &mut x, &mut p, &cfg).unwrap();
            p.iter_mut().for_each(|v| *v = -*v);
            leapfrog(&t, &mut x, &mut p, &cfg).unwrap();
            for d in 0..2 {
                assert!((x[d] - x0[d]).abs() < 1e-10);
                assert!((p[d] + p0[d]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reflected_trajectory_is_reversible_and_inside() {
        let t = flat(2).with_constraints(BoxConstraints::cube(2, -1.0, 1.0).unwrap()).unwrap();
        let cfg = HmcConfig::identity(2, 25, 0.1).unwrap();
        let x0 = vec![0.9, -0.2];
        let p0 = vec![3.3, -1.7];
        let (mut x, mut p) = (x0.clone(), p0.clone());
        leapfrog(&t, &mut x, &mut p, &cfg).unwrap();
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_abs_diff_eq!(kinetic_energy(&p, cfg.mass_diag()), kinetic_energy(&p0, cfg.mass_diag()), epsilon = 1e-12);
        p.iter_mut().for_each(|v| *v = -*v);
        leapfrog(&t, &mut x, &mut p, &cfg).unwrap();
        for d in 0..2 {
            assert!((x[d] - x0[d]).abs() < 1e-10);
            assert!((p[d] + p0[d]).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_jacobian_on_quadratic() {
        let t = gaussian(vec![0.0], vec![1.0]).unwrap();
        let cfg = HmcConfig::identity(1, 15, 0.1).unwrap();
        let map = |x: f64, p: f64| {
            let (mut a, mut b) = ([x], [p]);
            leapfrog(&t, &mut a, &mut b, &cfg).unwrap();
            (a[0], b[0])
        };
        let (x, p, h) = (0.4, -0.8, 1e-5);
        let dx = (map(x + h, p).0 - map(x - h, p).0, map(x + h, p).1 - map(x - h, p).1);
        let dp = (map(x, p + h).0 - map(x, p - h).0, map(x, p + h).1 - map(x, p - h).1);
        let det = (dx.0 * dp.1 - dx.1 * dp.0) / (4.0 * h * h);
        assert!((det - 1.0).abs() < 1e-8, "det = {det}");
    }

    #[test]
    fn non_finite_trajectory_is_rejected() {
        // density vanishes for x > 1
        let t = TargetDensity::from_fns(
            1,
            |x| if x[0] > 1.0 { f64::NEG_INFINITY } else { 0.0 },
            |_, g| g.fill(0.0),
        );
        let cfg = HmcConfig::identity(1, 50, 0.5).unwrap();
        let mut rng = RandomSource::new(8, 8);
        let mut rejected = 0;
        for _ in 0..100 {
            let out = hmc_step(&t, &[0.0], &cfg, &mut rng).unwrap();
            if !out.accepted {
                assert_eq!(out.new_position, vec![0.0]);
                rejected += 1;
            }
        }
        assert!(rejected > 0);
        let bad = hmc_step(&t, &[2.0], &cfg, &mut rng);
        assert!(matches!(bad, Err(Error::InvalidState(_))));
    }
}
