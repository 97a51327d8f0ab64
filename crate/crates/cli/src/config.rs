//! Run configuration files (TOML).
//!
//! Every section mirrors a run parameter; see the README for the full key
//! list. Relative data paths are resolved against the config file's
//! directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    Syntax(String),
    Invalid { field: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Syntax(msg) => write!(f, "config syntax error: {msg}"),
            ConfigError::Invalid { field, reason } => write!(f, "invalid config field `{field}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Mh,
    Hmc,
    Smc,
    Hsmc,
}

impl Algorithm {
    pub fn is_sequential(self) -> bool {
        matches!(self, Algorithm::Smc | Algorithm::Hsmc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    Rosenbrock,
    Gaussian { mean: Vec<f64>, cov_diag: Vec<f64> },
    Smiley,
    Dropwave,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bandwidth {
    ScaledRate,
    Fixed(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    Kde {
        data: PathBuf,
        block_size: usize,
        bandwidth: Bandwidth,
        constraints: Option<(Vec<f64>, Vec<f64>)>,
    },
    /// `prior` multiplies each likelihood stage by the initial density.
    Loglik { data: PathBuf, block_size: usize, prior: bool },
    Tempering { phis: Vec<f64> },
    Annealing { gammas: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Truncate to the final target's constraint box.
    pub truncate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    Hmc { mass_diag: Option<Vec<f64>>, leapfrog_steps: usize, step_size: f64 },
    Mh { proposal_scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weights {
    Theoretical,
    LooKde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resampling {
    Multinomial,
    Systematic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmcSpec {
    pub n_particles: usize,
    pub n_groups: usize,
    pub mutation_steps: usize,
    pub weights: Weights,
    pub resampling: Resampling,
    pub ess_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub iterations: usize,
    pub start: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub target: Option<TargetSpec>,
    pub sequence: Option<SequenceSpec>,
    pub initial: Option<InitialSpec>,
    pub kernel: KernelSpec,
    pub smc: Option<SmcSpec>,
    pub chain: Option<ChainSpec>,
    pub grid: GridSpec,
    /// Centers for the per-group mode masses in `report.json`.
    pub mode_centers: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    algorithm: String,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    target: Option<RawTarget>,
    sequence: Option<RawSequence>,
    initial: Option<RawInitial>,
    kernel: RawKernel,
    smc: Option<RawSmc>,
    chain: Option<RawChain>,
    grid: Option<RawGrid>,
    mode_centers: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    name: String,
    mean: Option<Vec<f64>>,
    cov_diag: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    kind: String,
    data: Option<PathBuf>,
    block_size: Option<usize>,
    bandwidth: Option<String>,
    bandwidth_values: Option<Vec<f64>>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    phis: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    prior: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    mean: Vec<f64>,
    sd: Vec<f64>,
    truncate: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    #[serde(rename = "type")]
    kind: String,
    mass_diag: Option<Vec<f64>>,
    leapfrog_steps: Option<usize>,
    step_size: Option<f64>,
    proposal_scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSmc {
    n_particles: usize,
    n_groups: Option<usize>,
    mutation_steps: Option<usize>,
    weights: Option<String>,
    resampling: Option<String>,
    ess_threshold: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    iterations: usize,
    start: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    resolution: Option<usize>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

/// Parses config text; relative paths are resolved against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    validate(raw, base)
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be at least {min}, got {v}")))
    }
}

fn finite_vec(field: &str, v: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(v)
}

fn positive_vec(field: &str, v: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    let v = finite_vec(field, v)?;
    if v.iter().any(|x| *x <= 0.0) {
        return Err(invalid(field, "entries must be positive"));
    }
    Ok(v)
}

fn bounds(
    prefix: &str,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
) -> Result<Option<(Vec<f64>, Vec<f64>)>, ConfigError> {
    match (lower, upper) {
        (None, None) => Ok(None),
        (Some(l), Some(u)) => {
            if l.len() != u.len() {
                return Err(invalid(&format!("{prefix}.upper"), "length differs from lower"));
            }
            if l.iter().zip(&u).any(|(a, b)| !(a < b)) {
                return Err(invalid(&format!("{prefix}.upper"), "each upper bound must exceed its lower bound"));
            }
            Ok(Some((l, u)))
        }
        (Some(_), None) => Err(invalid(&format!("{prefix}.upper"), "missing (lower given)")),
        (None, Some(_)) => Err(invalid(&format!("{prefix}.lower"), "missing (upper given)")),
    }
}

fn validate(raw: RawConfig, base: &Path) -> Result<RunConfig, ConfigError> {
    let algorithm = match raw.algorithm.as_str() {
        "mh" => Algorithm::Mh,
        "hmc" => Algorithm::Hmc,
        "smc" => Algorithm::Smc,
        "hsmc" => Algorithm::Hsmc,
        other => return Err(invalid("algorithm", format!("unknown algorithm `{other}` (expected mh, hmc, smc or hsmc)"))),
    };

    let target = raw.target.map(validate_target).transpose()?;
    let kernel = validate_kernel(raw.kernel)?;
    let sequence = raw.sequence.map(|s| validate_sequence(s, base)).transpose()?;

    let initial = raw
        .initial
        .map(|i| {
            let mean = finite_vec("initial.mean", i.mean)?;
            let sd = positive_vec("initial.sd", i.sd)?;
            if sd.len() != mean.len() {
                return Err(invalid("initial.sd", "length differs from initial.mean"));
            }
            Ok(InitialSpec {
                mean,
                sd,
                truncate: i.truncate.unwrap_or(false),
            })
        })
        .transpose()?;

    let smc = raw
        .smc
        .map(|s| {
            let weights = match s.weights.as_deref() {
                None if algorithm == Algorithm::Smc => Weights::Theoretical,
                None => Weights::LooKde,
                Some("theoretical") => Weights::Theoretical,
                Some("loo_kde") => Weights::LooKde,
                Some(other) => return Err(invalid("smc.weights", format!("unknown mode `{other}` (expected theoretical or loo_kde)"))),
            };
            let resampling = match s.resampling.as_deref() {
                None | Some("multinomial") => Resampling::Multinomial,
                Some("systematic") => Resampling::Systematic,
                Some(other) => return Err(invalid("smc.resampling", format!("unknown scheme `{other}`"))),
            };
            let ess_threshold = s
                .ess_threshold
                .map(|t| {
                    if t > 0.0 && t <= 1.0 {
                        Ok(t)
                    } else {
                        Err(invalid("smc.ess_threshold", "must lie in (0, 1]"))
                    }
                })
                .transpose()?;
            Ok(SmcSpec {
                n_particles: at_least("smc.n_particles", s.n_particles, 2)?,
                n_groups: at_least("smc.n_groups", s.n_groups.unwrap_or(1), 1)?,
                mutation_steps: at_least("smc.mutation_steps", s.mutation_steps.unwrap_or(1), 1)?,
                weights,
                resampling,
                ess_threshold,
            })
        })
        .transpose()?;

    let chain = raw
        .chain
        .map(|c| {
            Ok(ChainSpec {
                iterations: at_least("chain.iterations", c.iterations, 1)?,
                start: finite_vec("chain.start", c.start)?,
            })
        })
        .transpose()?;

    let grid = match raw.grid {
        None => GridSpec {
            resolution: 101,
            bounds: None,
        },
        Some(g) => GridSpec {
            resolution: at_least("grid.resolution", g.resolution.unwrap_or(101), 2)?,
            bounds: bounds("grid", g.lower, g.upper)?,
        },
    };

    if let Some(centers) = &raw.mode_centers {
        if centers.is_empty() || centers.iter().any(|c| c.len() != centers[0].len() || c.is_empty()) {
            return Err(invalid("mode_centers", "need at least one center, all of one dimension"));
        }
    }

    if algorithm.is_sequential() {
        let seq = sequence.as_ref().ok_or_else(|| invalid("sequence", "required for smc and hsmc"))?;
        if smc.is_none() {
            return Err(invalid("smc", "required for smc and hsmc"));
        }
        if initial.is_none() {
            return Err(invalid("initial", "required for smc and hsmc"));
        }
        if matches!(seq, SequenceSpec::Tempering { .. } | SequenceSpec::Annealing { .. }) && target.is_none() {
            return Err(invalid("target", "required for tempering and annealing sequences"));
        }
    } else {
        if target.is_none() {
            return Err(invalid("target", "required for mh and hmc"));
        }
        if chain.is_none() {
            return Err(invalid("chain", "required for mh and hmc"));
        }
        let expected = if algorithm == Algorithm::Mh { "mh" } else { "hmc" };
        let actual = match kernel {
            KernelSpec::Mh { .. } => "mh",
            KernelSpec::Hmc { .. } => "hmc",
        };
        if expected != actual {
            return Err(invalid("kernel.type", format!("algorithm {expected} needs a {expected} kernel")));
        }
    }

    Ok(RunConfig {
        algorithm,
        seed: raw.seed.unwrap_or(0),
        output_dir: resolve(base, raw.output_dir.unwrap_or_else(|| PathBuf::from("output"))),
        target,
        sequence,
        initial,
        kernel,
        smc,
        chain,
        grid,
        mode_centers: raw.mode_centers,
    })
}

fn validate_target(t: RawTarget) -> Result<TargetSpec, ConfigError> {
    match t.name.as_str() {
        "rosenbrock" => Ok(TargetSpec::Rosenbrock),
        "smiley" => Ok(TargetSpec::Smiley),
        "dropwave" => Ok(TargetSpec::Dropwave),
        "gaussian" => {
            let mean = finite_vec("target.mean", t.mean.ok_or_else(|| invalid("target.mean", "required for gaussian"))?)?;
            let cov_diag = positive_vec(
                "target.cov_diag",
                t.cov_diag.ok_or_else(|| invalid("target.cov_diag", "required for gaussian"))?,
            )?;
            if cov_diag.len() != mean.len() {
                return Err(invalid("target.cov_diag", "length differs from target.mean"));
            }
            Ok(TargetSpec::Gaussian { mean, cov_diag })
        }
        other => Err(invalid("target.name", format!("unknown target `{other}` (expected rosenbrock, gaussian, smiley or dropwave)"))),
    }
}

fn validate_kernel(k: RawKernel) -> Result<KernelSpec, ConfigError> {
    match k.kind.as_str() {
        "hmc" => {
            let step_size = positive(
                "kernel.step_size",
                k.step_size.ok_or_else(|| invalid("kernel.step_size", "required for hmc"))?,
            )?;
            let leapfrog_steps = at_least(
                "kernel.leapfrog_steps",
                k.leapfrog_steps.ok_or_else(|| invalid("kernel.leapfrog_steps", "required for hmc"))?,
                1,
            )?;
            let mass_diag = k.mass_diag.map(|m| positive_vec("kernel.mass_diag", m)).transpose()?;
            Ok(KernelSpec::Hmc {
                mass_diag,
                leapfrog_steps,
                step_size,
            })
        }
        "mh" => Ok(KernelSpec::Mh {
            proposal_scale: positive(
                "kernel.proposal_scale",
                k.proposal_scale.ok_or_else(|| invalid("kernel.proposal_scale", "required for mh"))?,
            )?,
        }),
        other => Err(invalid("kernel.type", format!("unknown kernel `{other}` (expected hmc or mh)"))),
    }
}

fn validate_sequence(s: RawSequence, base: &Path) -> Result<SequenceSpec, ConfigError> {
    let data = |s: &RawSequence| {
        s.data
            .clone()
            .map(|p| resolve(base, p))
            .ok_or_else(|| invalid("sequence.data", "required for data-block sequences"))
    };
    let block_size = |s: &RawSequence| {
        at_least(
            "sequence.block_size",
            s.block_size.ok_or_else(|| invalid("sequence.block_size", "required for data-block sequences"))?,
            1,
        )
    };
    if s.prior.is_some() && s.kind != "loglik" {
        return Err(invalid("sequence.prior", "only allowed with kind = \"loglik\""));
    }
    match s.kind.as_str() {
        "kde" => {
            let bandwidth = match (s.bandwidth.as_deref(), s.bandwidth_values.clone()) {
                (None | Some("scaled_rate"), None) => Bandwidth::ScaledRate,
                (None | Some("fixed"), Some(v)) => Bandwidth::Fixed(positive_vec("sequence.bandwidth_values", v)?),
                (Some("fixed"), None) => return Err(invalid("sequence.bandwidth_values", "required for a fixed bandwidth")),
                (Some("scaled_rate"), Some(_)) => {
                    return Err(invalid("sequence.bandwidth_values", "only allowed with bandwidth = \"fixed\""))
                }
                (Some(other), _) => return Err(invalid("sequence.bandwidth", format!("unknown rule `{other}` (expected scaled_rate or fixed)"))),
            };
            Ok(SequenceSpec::Kde {
                data: data(&s)?,
                block_size: block_size(&s)?,
                bandwidth,
                constraints: bounds("sequence", s.lower, s.upper)?,
            })
        }
        "loglik" => Ok(SequenceSpec::Loglik {
            data: data(&s)?,
            block_size: block_size(&s)?,
            prior: s.prior.unwrap_or(false),
        }),
        "tempering" => Ok(SequenceSpec::Tempering {
            phis: s.phis.ok_or_else(|| invalid("sequence.phis", "required for tempering"))?,
        }),
        "annealing" => Ok(SequenceSpec::Annealing {
            gammas: s.gammas.ok_or_else(|| invalid("sequence.gammas", "required for annealing"))?,
        }),
        other => Err(invalid("sequence.kind", format!("unknown kind `{other}` (expected kde, loglik, tempering or annealing)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMILEY: &str = r#"
algorithm = "hsmc"
seed = 7
output_dir = "out"

[sequence]
kind = "kde"
data = "smiley.csv"
block_size = 100

[initial]
mean = [0.0, 10.0]
sd = [10.0, 20.0]

[kernel]
type = "hmc"
leapfrog_steps = 20
step_size = 0.05

[smc]
n_particles = 512
n_groups = 4
"#;

    fn field_of(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { field, .. } => field,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn smiley_recipe() {
        let c = parse_config_str(SMILEY, Path::new("/exp")).unwrap();
        assert_eq!(c.algorithm, Algorithm::Hsmc);
        let smc = c.smc.unwrap();
        assert_eq!((smc.n_particles, smc.n_groups, smc.weights), (512, 4, Weights::LooKde));
        assert_eq!(
            c.kernel,
            KernelSpec::Hmc {
                mass_diag: None,
                leapfrog_steps: 20,
                step_size: 0.05
            }
        );
        assert_eq!(c.output_dir, PathBuf::from("/exp/out"));
        match c.sequence.unwrap() {
            SequenceSpec::Kde { data, block_size, .. } => {
                assert_eq!(data, PathBuf::from("/exp/smiley.csv"));
                assert_eq!(block_size, 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_step_size_names_field() {
        let text = SMILEY.replace("step_size = 0.05", "step_size = -1.0");
        assert_eq!(field_of(parse_config_str(&text, Path::new(".")).unwrap_err()), "kernel.step_size");
    }

    #[test]
    fn unknown_algorithm() {
        let text = SMILEY.replace("\"hsmc\"", "\"gibbs\"");
        assert_eq!(field_of(parse_config_str(&text, Path::new(".")).unwrap_err()), "algorithm");
    }

    #[test]
    fn smc_defaults_to_theoretical_weights() {
        let text = SMILEY.replace("\"hsmc\"", "\"smc\"");
        let c = parse_config_str(&text, Path::new(".")).unwrap();
        assert_eq!(c.smc.unwrap().weights, Weights::Theoretical);
    }

    #[test]
    fn missing_sections() {
        let text = SMILEY.replace("[smc]\nn_particles = 512\nn_groups = 4\n", "");
        assert_eq!(field_of(parse_config_str(&text, Path::new(".")).unwrap_err()), "smc");
        let chain = "algorithm = \"mh\"\n[target]\nname = \"rosenbrock\"\n[kernel]\ntype = \"mh\"\nproposal_scale = 0.2\n";
        assert_eq!(field_of(parse_config_str(chain, Path::new(".")).unwrap_err()), "chain");
        let wrong_kernel = format!("{chain}[chain]\niterations = 10\nstart = [0.0, 0.0]\n").replace("algorithm = \"mh\"", "algorithm = \"hmc\"");
        assert_eq!(field_of(parse_config_str(&wrong_kernel, Path::new(".")).unwrap_err()), "kernel.type");
    }

    #[test]
    fn bad_values() {
        let cases = [
            ("n_particles = 512", "n_particles = 1", "smc.n_particles"),
            ("sd = [10.0, 20.0]", "sd = [10.0, 0.0]", "initial.sd"),
            ("sd = [10.0, 20.0]", "sd = [10.0]", "initial.sd"),
            ("kind = \"kde\"", "kind = \"spline\"", "sequence.kind"),
            ("block_size = 100", "block_size = 0", "sequence.block_size"),
            ("leapfrog_steps = 20", "leapfrog_steps = 0", "kernel.leapfrog_steps"),
            ("n_groups = 4", "n_groups = 4\nweights = \"ratio\"", "smc.weights"),
            ("n_groups = 4", "n_groups = 4\ness_threshold = 1.5", "smc.ess_threshold"),
            ("block_size = 100", "block_size = 100\nlower = [0.0, 0.0]", "sequence.upper"),
            ("block_size = 100", "block_size = 100\nprior = true", "sequence.prior"),
            ("block_size = 100", "block_size = 100\nlower = [0.0, 0.0]\nupper = [1.0, -1.0]", "sequence.upper"),
        ];
        for (from, to, field) in cases {
            let text = SMILEY.replace(from, to);
            assert_eq!(field_of(parse_config_str(&text, Path::new(".")).unwrap_err()), field, "{to}");
        }
    }

    #[test]
    fn syntax_and_unknown_keys() {
        assert!(matches!(parse_config_str("algorithm = ", Path::new(".")), Err(ConfigError::Syntax(_))));
        let text = SMILEY.replace("seed = 7", "seed = 7\ncolour = \"red\"");
        assert!(matches!(parse_config_str(&text, Path::new(".")), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(parse_config(Path::new("/nonexistent/run.toml")), Err(ConfigError::Io { .. })));
    }
}
