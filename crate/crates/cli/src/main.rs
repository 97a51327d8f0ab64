use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hsmc_cli::{exit_code, generate_data, run_file, DataKind};

#[derive(Parser)]
#[command(name = "hsmc", version, about = "Run MH, HMC, SMC and HSMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Record every iteration in particles.csv instead of only the last.
        #[arg(long)]
        record_all: bool,
        /// Worker threads (0 = all cores). HSMC_THREADS takes precedence.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Write a synthetic data set as CSV.
    GenData {
        kind: DataKind,
        n: usize,
        seed: u64,
        out: PathBuf,
    },
}

fn thread_count(flag: usize) -> Result<usize, String> {
    match std::env::var("HSMC_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| format!("HSMC_THREADS must be a non-negative integer, got `{v}`")),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            record_all,
            threads,
        } => {
            let threads = match thread_count(threads) {
                Ok(t) => t,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            };
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                eprintln!("error: cannot start worker threads: {e}");
                return ExitCode::from(1);
            }
            run_file(&config, record_all).map(|c| {
                eprintln!("wrote outputs to {}", c.output_dir.display());
            })
        }
        Command::GenData { kind, n, seed, out } => generate_data(kind, n, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
