use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::kde::{loo_log_densities, silverman_bandwidth};
use crate::target::TargetDensity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `w_old * f_t / f_{t-1}`
    TheoreticalRatio,
    /// `f_t / f_hat`, where `f_hat` is the leave-one-out KDE of the current
    /// positions (old weights are not carried).
    #[default]
    LooKdeRatio,
}

/// Unnormalised log correction weights. Zero-density particles get `-inf`.
pub fn correction_log_weights(
    ensemble: &Ensemble,
    f_next: &TargetDensity,
    f_prev: &TargetDensity,
    mode: WeightMode,
) -> Result<Vec<f64>> {
    if ensemble.len() < 2 {
        return Err(Error::Size {
            min: 2,
            got: ensemble.len(),
        });
    }
    let log_next: Vec<f64> = ensemble.positions().map(|x| f_next.log_f(x)).collect();
    let log_den: Vec<f64> = match mode {
        WeightMode::TheoreticalRatio => ensemble
            .particles()
            .iter()
            .map(|p| f_prev.log_f(&p.position) - p.weight.ln())
            .collect(),
        WeightMode::LooKdeRatio => {
            let h = silverman_bandwidth(ensemble)?;
            loo_log_densities(ensemble, &h)?
        }
    };
    Ok(log_next
        .into_iter()
        .zip(log_den)
        .map(|(a, b)| {
            let lw = a - b;
            if a == f64::NEG_INFINITY || lw.is_nan() {
                f64::NEG_INFINITY
            } else {
                lw
            }
        })
        .collect())
}

/// Exponentiates after subtracting the maximum, so the largest weight is 1.
pub fn exp_normalized(log_w: &[f64]) -> Result<Vec<f64>> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::INFINITY {
        return Err(Error::DegenerateWeights("infinite log weight".into()));
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights("every particle has zero weight".into()));
    }
    Ok(log_w.iter().map(|l| (l - max).exp()).collect())
}

pub fn correction_weights(
    ensemble: &Ensemble,
    f_next: &TargetDensity,
    f_prev: &TargetDensity,
    mode: WeightMode,
) -> Result<Vec<f64>> {
    exp_normalized(&correction_log_weights(ensemble, f_next, f_prev, mode)?)
}
