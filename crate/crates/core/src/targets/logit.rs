//! Binary logit with the non-linear utility
//! `V(x) = 2 sin(beta2 x) / (1 + 0.5 (beta1 - x)^2)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::target::{LogDensity, TargetDensity};

/// Offers are drawn on this colour range.
pub const OFFER_RANGE: (f64, f64) = (-2.0, 8.0);

/// Observed experiments: the offered colour and whether it was taken.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitData {
    offers: Vec<f64>,
    choices: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    x: f64,
    choice: u8,
}

impl LogitData {
    pub fn new(offers: Vec<f64>, choices: Vec<bool>) -> Result<Self> {
        if offers.len() != choices.len() {
            return Err(Error::Dimension {
                expected: offers.len(),
                found: choices.len(),
            });
        }
        if let Some(x) = offers.iter().find(|x| !(OFFER_RANGE.0..=OFFER_RANGE.1).contains(*x)) {
            return Err(Error::param("offers", format!("offer {x} outside [-2, 8]")));
        }
        Ok(LogitData { offers, choices })
    }

    pub fn len(&self) -> usize {
        self.offers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offers.is_empty()
    }

    pub fn offers(&self) -> &[f64] {
        &self.offers
    }

    pub fn choices(&self) -> &[bool] {
        &self.choices
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> LogitData {
        let n = n.min(self.len());
        LogitData {
            offers: self.offers[..n].to_vec(),
            choices: self.choices[..n].to_vec(),
        }
    }

    /// Writes `x,choice` CSV with round-trip decimal offers.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (&x, &c) in self.offers.iter().zip(&self.choices) {
            w.serialize(Row { x, choice: c as u8 })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "choice"] {
            return Err(Error::param("header", format!("expected `x,choice`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut offers = Vec::new();
        let mut choices = Vec::new();
        for row in r.deserialize() {
            let row: Row = row?;
            if row.choice > 1 {
                return Err(Error::param("choice", format!("expected 0 or 1, got {}", row.choice)));
            }
            offers.push(row.x);
            choices.push(row.choice == 1);
        }
        Self::new(offers, choices)
    }
}

/// Deterministic utility of offer `x` under `beta = (beta1, beta2)`.
pub fn utility(beta: [f64; 2], x: f64) -> f64 {
    2.0 * (beta[1] * x).sin() / (1.0 + 0.5 * (beta[0] - x).powi(2))
}

/// Probability the offer is taken, `e^V / (1 + e^V)`.
pub fn choice_probability(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^v)` without overflow.
fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

/// Log-likelihood over `(beta1, beta2)`.
pub fn nonlinear_logit_loglik(data: LogitData) -> Result<TargetDensity> {
    if data.is_empty() {
        return Err(Error::param("data", "no observations"));
    }
    Ok(TargetDensity::new(LogitLikelihood { data }))
}

struct LogitLikelihood {
    data: LogitData,
}

impl LogDensity for LogitLikelihood {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, beta: &[f64]) -> f64 {
        let beta = [beta[0], beta[1]];
        self.data
            .offers
            .iter()
            .zip(&self.data.choices)
            .map(|(&x, &c)| {
                let v = utility(beta, x);
                if c { v - softplus(v) } else { -softplus(v) }
            })
            .sum()
    }

    fn grad_log_density(&self, beta: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(beta, grad);
    }

    fn log_density_and_grad(&self, beta: &[f64], grad: &mut [f64]) -> f64 {
        let (b1, b2) = (beta[0], beta[1]);
        let mut total = 0.0;
        grad[0] = 0.0;
        grad[1] = 0.0;
        for (&x, &c) in self.data.offers.iter().zip(&self.data.choices) {
            let s = (b2 * x).sin();
            let dist = b1 - x;
            let denom = 1.0 + 0.5 * dist * dist;
            let v = 2.0 * s / denom;
            let taken = if c { 1.0 } else { 0.0 };
            total += taken * v - softplus(v);
            let dl_dv = taken - choice_probability(v);
            grad[0] += dl_dv * (-2.0 * s * dist / (denom * denom));
            grad[1] += dl_dv * (2.0 * x * (b2 * x).cos() / denom);
        }
        total
    }
}

/// `n` experiments with offers uniform on [-2, 8] and logistic choices at `beta`.
pub fn simulate_logit_data(n: usize, beta: [f64; 2], rng: &mut RandomSource) -> Result<LogitData> {
    if n == 0 {
        return Err(Error::param("n", "need at least one observation"));
    }
    let mut offers = Vec::with_capacity(n);
    let mut choices = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.uniform_range(OFFER_RANGE.0, OFFER_RANGE.1);
        let p = choice_probability(utility(beta, x));
        offers.push(x);
        choices.push(rng.uniform() < p);
    }
    LogitData::new(offers, choices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{assert_gradient_matches, random_points};
    use approx::assert_abs_diff_eq;

    fn data(seed: u64) -> LogitData {
        simulate_logit_data(400, [3.0, 3.0], &mut RandomSource::new(seed, 0)).unwrap()
    }

    #[test]
    fn logistic_at_zero() {
        assert_eq!(choice_probability(0.0), 0.5);
        assert!(choice_probability(800.0) == 1.0 && choice_probability(-800.0) >= 0.0);
        assert_abs_diff_eq!(softplus(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
    }

    #[test]
    fn utility_at_truth() {
        assert_abs_diff_eq!(utility([3.0, 3.0], 3.0), 2.0 * 9f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(utility([3.0, 3.0], 3.0), 0.82424, epsilon = 1e-5);
    }

    #[test]
    fn far_ideal_colour_gives_coin_flips() {
        for x in [-2.0, 0.0, 3.0, 8.0] {
            let p = choice_probability(utility([1e6, 3.0], x));
            assert!((p - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn simulated_records() {
        let d = data(1);
        assert_eq!(d.len(), 400);
        assert!(d.offers().iter().all(|x| (-2.0..=8.0).contains(x)));
        assert!(matches!(
            simulate_logit_data(0, [3.0, 3.0], &mut RandomSource::new(0, 0)),
            Err(Error::Parameter { name: "n", .. })
        ));
    }

    #[test]
    fn coin_flip_frequency() {
        // x = 0 gives V = 0 for any beta; check the Bernoulli draw directly
        let mut rng = RandomSource::new(5, 1);
        let n = 100_000;
        let taken = (0..n).filter(|_| rng.uniform() < choice_probability(utility([3.0, 3.0], 0.0))).count();
        assert!((taken as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn loglik_matches_direct_sum() {
        let d = data(2);
        let t = nonlinear_logit_loglik(d.clone()).unwrap();
        let beta = [2.5, 3.2];
        let direct: f64 = d
            .offers()
            .iter()
            .zip(d.choices())
            .map(|(&x, &c)| {
                let p = choice_probability(utility(beta, x));
                if c { p.ln() } else { (1.0 - p).ln() }
            })
            .sum();
        assert_abs_diff_eq!(t.log_f(&beta), direct, epsilon = 1e-9);
        assert!(t.log_f(&[3.0, 3.0]) > t.log_f(&[4.0, -2.0]));
    }

    #[test]
    fn loglik_gradient() {
        let t = nonlinear_logit_loglik(data(3)).unwrap();
        assert_gradient_matches(&t, &random_points(100, &[-2.0, -4.0], &[8.0, 6.0], 11));
    }

    #[test]
    fn empty_and_invalid_data() {
        assert!(nonlinear_logit_loglik(LogitData::new(vec![], vec![]).unwrap()).is_err());
        assert!(LogitData::new(vec![9.0], vec![true]).is_err());
        assert!(LogitData::new(vec![1.0, 2.0], vec![true]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let d = data(4).prefix(25);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,choice\n"));
        assert_eq!(LogitData::read_csv(buf.as_slice()).unwrap(), d);
        assert!(LogitData::read_csv("a,b\n1,0\n".as_bytes()).is_err());
    }
}
