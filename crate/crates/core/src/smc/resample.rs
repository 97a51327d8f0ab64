use std::cmp::Ordering;

use crate::ensemble::{normalize, Ensemble, Particle};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResamplingScheme {
    /// N i.i.d. categorical draws.
    #[default]
    Multinomial,
    /// One uniform offset, N evenly spaced points on the weight CDF.
    Systematic,
}

/// Draws N particles with replacement in proportion to `weights`; every
/// output weight is 1.
///
/// Candidates are visited in lexicographic order of position, so the output
/// depends only on the multiset of (position, weight) pairs and not on their
/// order in `ensemble`. The output is sorted the same way.
pub fn resample(
    ensemble: &Ensemble,
    weights: &[f64],
    scheme: ResamplingScheme,
    rng: &mut RandomSource,
) -> Result<Ensemble> {
    let n = ensemble.len();
    if weights.len() != n {
        return Err(Error::Size {
            min: n,
            got: weights.len(),
        });
    }
    let p = normalize(weights)?;
    let particles = ensemble.particles();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| canonical(&particles[a], p[a], &particles[b], p[b]));

    let points: Vec<f64> = match scheme {
        ResamplingScheme::Multinomial => {
            let mut u: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            u.sort_by(f64::total_cmp);
            u
        }
        ResamplingScheme::Systematic => {
            let offset = rng.uniform();
            (0..n).map(|k| (k as f64 + offset) / n as f64).collect()
        }
    };

    // last index with positive weight absorbs rounding at the top of the CDF
    let last = *order.iter().rev().find(|&&i| p[i] > 0.0).expect("normalised weights");
    let mut out = Vec::with_capacity(n);
    let mut cursor = 0;
    let mut cdf = p[order[0]];
    for u in points {
        while u >= cdf && cursor + 1 < n {
            cursor += 1;
            cdf += p[order[cursor]];
        }
        let mut idx = order[cursor];
        if p[idx] == 0.0 {
            idx = last;
        }
        out.push(Particle::new(particles[idx].position.clone()));
    }
    Ensemble::new(out, ensemble.iteration(), ensemble.group())
}

fn canonical(a: &Particle, wa: f64, b: &Particle, wb: f64) -> Ordering {
    for (x, y) in a.position.iter().zip(&b.position) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    wa.total_cmp(&wb)
}

/// How many times each input position was selected (by exact position match).
#[cfg(test)]
pub(crate) fn copy_counts(input: &Ensemble, output: &Ensemble) -> Vec<usize> {
    input
        .positions()
        .map(|x| output.positions().filter(|y| *y == x).count())
        .collect()
}
