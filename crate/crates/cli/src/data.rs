//! Synthetic data sets and their CSV form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use hsmc::targets::{dropwave_sample, simulate_logit_data, smiley_sample, LogitData};
use hsmc::{Purpose, RandomSource, StreamKey};

/// The slope pair used for simulated logit experiments.
pub const LOGIT_BETA: [f64; 2] = [3.0, 3.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DataKind {
    Smiley,
    Dropwave,
    Logit,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Points(Vec<Vec<f64>>),
    Logit(LogitData),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Points(p) => p.len(),
            Dataset::Logit(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> anyhow::Result<()> {
        match self {
            Dataset::Points(p) => write_points_csv(p, writer),
            Dataset::Logit(d) => Ok(d.write_csv(writer)?),
        }
    }
}

fn data_source(seed: u64) -> RandomSource {
    StreamKey::new(seed, 0, 0).source(Purpose::Data, 0)
}

pub fn generate(kind: DataKind, n: usize, seed: u64) -> anyhow::Result<Dataset> {
    if n == 0 {
        bail!("invalid value for `n`: must be at least 1");
    }
    let mut rng = data_source(seed);
    Ok(match kind {
        DataKind::Smiley => Dataset::Points(smiley_sample(n, &mut rng)?),
        DataKind::Dropwave => Dataset::Points(dropwave_sample(n, &mut rng)?),
        DataKind::Logit => Dataset::Logit(simulate_logit_data(n, LOGIT_BETA, &mut rng)?),
    })
}

pub fn generate_data(kind: DataKind, n: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    let data = generate(kind, n, seed)?;
    let file = File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    data.write_csv(BufWriter::new(file))
        .with_context(|| format!("cannot write {}", out.display()))
}

/// Coordinate columns are named `x, y` in two dimensions and `x1, x2, ...` otherwise.
pub fn coordinate_names(dim: usize) -> Vec<String> {
    if dim == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=dim).map(|d| format!("x{d}")).collect()
    }
}

pub fn write_points_csv<W: Write>(points: &[Vec<f64>], writer: W) -> anyhow::Result<()> {
    let dim = points.first().map_or(2, |p| p.len());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(coordinate_names(dim))?;
    for p in points {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headed CSV of numeric columns.
pub fn read_points_csv<R: Read>(reader: R) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(reader);
    let width = r.headers()?.len();
    let mut points = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != width {
            bail!("row {} has {} columns, expected {width}", line + 1, record.len());
        }
        let row = record
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("row {} is not numeric", line + 1))?;
        points.push(row);
    }
    if points.is_empty() {
        bail!("data file has no rows");
    }
    Ok(points)
}

pub fn read_points_file(path: &Path) -> anyhow::Result<Vec<Vec<f64>>> {
    let file = File::open(path).with_context(|| format!("cannot open data file {}", path.display()))?;
    read_points_csv(file).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn read_logit_file(path: &Path) -> anyhow::Result<LogitData> {
    let file = File::open(path).with_context(|| format!("cannot open data file {}", path.display()))?;
    LogitData::read_csv(file).with_context(|| format!("cannot parse {}", path.display()))
}
