//! Experiment driver for the `hsmc` samplers: configuration parsing, run
//! orchestration, data generation and output files.

pub mod config;
pub mod data;
pub mod output;
pub mod run;

use std::path::Path;

pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use data::{generate_data, DataKind};

/// Exit status for a run that stopped on degenerate weights.
pub const EXIT_ABORTED: i32 = 2;

/// Parses `config_path`, runs it and writes the outputs.
pub fn run_file(config_path: &Path, record_all: bool) -> anyhow::Result<RunConfig> {
    let config = parse_config(config_path)?;
    run_config(&config, record_all)?;
    Ok(config)
}

pub fn run_config(config: &RunConfig, record_all: bool) -> anyhow::Result<()> {
    let result = run::execute(config, record_all)?;
    output::write_outputs(config, &result, record_all)
}

/// Process exit status for an error returned by [`run_file`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<hsmc::Error>() {
        Some(hsmc::Error::Aborted { .. }) => EXIT_ABORTED,
        _ => 1,
    }
}
