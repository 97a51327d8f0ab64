use crate::error::{Error, Result};

use super::engine::RunReport;

/// Between-group spread of the final sample means divided by the pooled
/// within-group standard error, maximised over dimensions.
pub fn compare_groups(report: &RunReport) -> Result<f64> {
    let j = report.n_groups;
    if j < 2 {
        return Err(Error::param("n_groups", "need at least 2 groups to compare"));
    }
    let finals = (0..j)
        .map(|g| report.final_record(g).ok_or_else(|| Error::InvalidState(format!("no records for group {g}"))))
        .collect::<Result<Vec<_>>>()?;
    let dim = finals[0].sample_mean.len();
    let n = report.n_particles as f64;
    let mut worst: f64 = 0.0;
    for d in 0..dim {
        let means: Vec<f64> = finals.iter().map(|r| r.sample_mean[d]).collect();
        let grand = means.iter().sum::<f64>() / j as f64;
        let spread =
            (means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (j - 1) as f64).sqrt();
        if spread == 0.0 {
            continue;
        }
        let pooled_var = finals.iter().map(|r| r.sample_cov_diag[d]).sum::<f64>() / j as f64;
        let se = (pooled_var / n).sqrt();
        let ratio = if se > 0.0 { spread / se } else { f64::INFINITY };
        worst = worst.max(ratio);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smc::engine::IterationRecord;
    use crate::rng::RandomSource;

    fn record(group: usize, mean: Vec<f64>, var: Vec<f64>) -> IterationRecord {
        IterationRecord {
            group,
            iteration: 1,
            acceptance_count: 0,
            ess: 1.0,
            weight_min: 0.0,
            weight_max: 0.0,
            resampled: true,
            weighted_mean: mean.clone(),
            selected_mean: mean.clone(),
            sample_mean: mean,
            sample_cov_diag: var,
        }
    }

    fn report(n: usize, records: Vec<IterationRecord>) -> RunReport {
        RunReport {
            n_particles: n,
            n_groups: records.len(),
            n_stages: 1,
            mutation_steps: 1,
            iterations: records,
        }
    }

    fn gaussian_group(g: usize, n: usize, rng: &mut RandomSource) -> IterationRecord {
        let xs: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
        record(g, vec![m], vec![v])
    }

    #[test]
    fn identical_groups() {
        let r = report(100, vec![record(0, vec![1.0, 2.0], vec![1.0, 1.0]), record(1, vec![1.0, 2.0], vec![1.0, 1.0])]);
        assert_eq!(compare_groups(&r).unwrap(), 0.0);
    }

    #[test]
    fn single_group_is_error() {
        assert!(compare_groups(&report(10, vec![record(0, vec![0.0], vec![1.0])])).is_err());
    }

    #[test]
    fn same_gaussian_rarely_flagged() {
        let n = 10_000;
        let reps = 400;
        let mut flagged = 0;
        for rep in 0..reps {
            let mut rng = RandomSource::new(77, rep);
            let r = report(n, vec![gaussian_group(0, n, &mut rng), gaussian_group(1, n, &mut rng)]);
            if compare_groups(&r).unwrap() >= 3.0 {
                flagged += 1;
            }
        }
        // for J = 2 the statistic is |Z|, flagged with probability 0.0027
        assert!(flagged as f64 / reps as f64 <= 0.01, "{flagged}");
    }

    #[test]
    fn stuck_groups_flagged() {
        let r = report(512, vec![record(0, vec![2.5, 25.3], vec![0.1, 0.2]), record(1, vec![0.0, 0.0], vec![0.3, 0.3])]);
        assert!(compare_groups(&r).unwrap() > 30.0);
    }
}
