//! Writers for `particles.csv`, `report.json` and `grid.csv`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use hsmc::diagnostics::{mode_mass, weighted_moments, MomentSummary};
use hsmc::smc::{compare_groups, RunReport};
use hsmc::TargetDensity;
use serde::Serialize;

use crate::config::{Algorithm, GridSpec, RunConfig};
use crate::data::coordinate_names;
use crate::run::RunResult;

#[derive(Serialize)]
struct ChainReport<'a> {
    algorithm: &'a str,
    seed: u64,
    iterations: usize,
    acceptance_count: usize,
    acceptance_rate: f64,
    start: &'a [f64],
    final_position: &'a [f64],
    path_mean: Vec<f64>,
    path_var: Vec<f64>,
}

#[derive(Serialize)]
struct GroupSummary {
    group: usize,
    final_acceptance_count: usize,
    moments: MomentSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode_mass: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SmcReport<'a> {
    algorithm: &'a str,
    seed: u64,
    /// Final acceptance summed over groups.
    final_acceptance_count: usize,
    /// `None` with a single group.
    group_divergence: Option<f64>,
    groups: Vec<GroupSummary>,
    run: &'a RunReport,
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Mh => "mh",
        Algorithm::Hmc => "hmc",
        Algorithm::Smc => "smc",
        Algorithm::Hsmc => "hsmc",
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes all outputs for `result` into `config.output_dir`.
pub fn write_outputs(
    config: &RunConfig,
    result: &RunResult,
    record_all: bool,
) -> anyhow::Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    write_particles(result, record_all, create(&dir.join("particles.csv"))?)?;
    let mut report = create(&dir.join("report.json"))?;
    write_report(config, result, &mut report)?;
    report.flush()?;
    let target = result.target();
    if target.dim() == 2 {
        let bounds = grid_bounds(&config.grid, target, result);
        write_grid(target, &bounds, config.grid.resolution, create(&dir.join("grid.csv"))?)?;
    }
    Ok(())
}

pub fn write_particles<W: Write>(result: &RunResult, record_all: bool, writer: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let dim = result.target().dim();
    let mut header = vec!["group".to_string(), "iteration".into(), "particle_id".into()];
    header.extend(coordinate_names(dim));
    header.extend(["weight".to_string(), "accepted".into()]);
    w.write_record(&header)?;

    let mut row = |group: usize, iteration: usize, id: usize, x: &[f64], weight: f64, accepted: bool| {
        let mut rec = vec![group.to_string(), iteration.to_string(), id.to_string()];
        rec.extend(x.iter().map(|v| v.to_string()));
        rec.push(weight.to_string());
        rec.push(u8::from(accepted).to_string());
        w.write_record(&rec)
    };
    match result {
        RunResult::Chain { chain, .. } => {
            let last = chain.path.len() - 1;
            let first = if record_all { 0 } else { last };
            for i in first..=last {
                let accepted = i > 0 && chain.accepted[i - 1];
                row(0, i, 0, &chain.path[i], 1.0, accepted)?;
            }
        }
        RunResult::Smc { output, .. } => {
            for snaps in &output.snapshots {
                for s in snaps {
                    let e = &s.ensemble;
                    for (id, (p, acc)) in e.particles().iter().zip(&s.accepted).enumerate() {
                        row(e.group(), e.iteration(), id, &p.position, p.weight, *acc)?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(
    config: &RunConfig,
    result: &RunResult,
    writer: W,
) -> anyhow::Result<()> {
    let name = algorithm_name(config.algorithm);
    match result {
        RunResult::Chain { chain, .. } => {
            let (path_mean, path_var) = path_moments(&chain.path);
            let report = ChainReport {
                algorithm: name,
                seed: config.seed,
                iterations: chain.accepted.len(),
                acceptance_count: chain.acceptance_count,
                acceptance_rate: chain.acceptance_rate(),
                start: &chain.path[0],
                final_position: chain.path.last().expect("non-empty path"),
                path_mean,
                path_var,
            };
            serde_json::to_writer_pretty(writer, &report)?;
        }
        RunResult::Smc { output, .. } => {
            let run = &output.report;
            let mut groups = Vec::new();
            for (g, e) in output.final_ensembles().into_iter().enumerate() {
                groups.push(GroupSummary {
                    group: g,
                    final_acceptance_count: run.final_record(g).map_or(0, |r| r.acceptance_count),
                    moments: weighted_moments(e)?,
                    mode_mass: config.mode_centers.as_deref().map(|c| mode_mass(e, c)).transpose()?,
                });
            }
            let report = SmcReport {
                algorithm: name,
                seed: config.seed,
                final_acceptance_count: groups.iter().map(|g| g.final_acceptance_count).sum(),
                group_divergence: if run.n_groups >= 2 { Some(compare_groups(run)?) } else { None },
                groups,
                run,
            };
            serde_json::to_writer_pretty(writer, &report)?;
        }
    }
    Ok(())
}

fn path_moments(path: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = path.len() as f64;
    let dim = path[0].len();
    let mut mean = vec![0.0; dim];
    for x in path {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; dim];
    for x in path {
        for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (mean, var)
}

/// Grid box: explicit bounds, else the target's finite constraint box, else
/// the final particles' range padded by 10%.
pub fn grid_bounds(spec: &GridSpec, target: &TargetDensity, result: &RunResult) -> (Vec<f64>, Vec<f64>) {
    if let Some((l, u)) = &spec.bounds {
        return (l.clone(), u.clone());
    }
    if let Some(c) = target.constraints() {
        if c.lower().iter().chain(c.upper()).all(|v| v.is_finite()) {
            return (c.lower().to_vec(), c.upper().to_vec());
        }
    }
    let points: Vec<&[f64]> = match result {
        RunResult::Chain { chain, .. } => chain.path.iter().map(|p| p.as_slice()).collect(),
        RunResult::Smc { output, .. } => output.final_ensembles().into_iter().flat_map(|e| e.positions()).collect(),
    };
    let dim = target.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in &points {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    for d in 0..dim {
        let pad = ((hi[d] - lo[d]) * 0.1).max(1e-3);
        lo[d] -= pad;
        hi[d] += pad;
    }
    (lo, hi)
}

pub fn write_grid<W: Write>(
    target: &TargetDensity,
    bounds: &(Vec<f64>, Vec<f64>),
    resolution: usize,
    writer: W,
) -> anyhow::Result<()> {
    let (lo, hi) = bounds;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "log_f"])?;
    let step = |d: usize, k: usize| lo[d] + (hi[d] - lo[d]) * k as f64 / (resolution - 1) as f64;
    for i in 0..resolution {
        let x = step(0, i);
        for j in 0..resolution {
            let y = step(1, j);
            let v = target.log_f(&[x, y]);
            w.write_record([x.to_string(), y.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
