use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::info;
use ris_swipt::harness::{self, FileConfig};

#[derive(Parser)]
#[command(name = "ris-swipt", version, about = "Two-timescale secrecy beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured scheme once and write run.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Sweep one numeric config key and write sweep_<param>.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 35,45,55
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Run the invariant smoke suite.
    Validate {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: &Path) -> anyhow::Result<FileConfig> {
    FileConfig::load(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    harness::init_threads()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed } => {
            let file = load(&config)?;
            let records = harness::run_records(&file, seed)?;
            let path = harness::run_csv_path(&out);
            harness::write_csv(&path, &records)?;
            for r in &records {
                info!("{}: {:.4} ± {:.4} bits/s/Hz ({} slots, {} dropped)", r.scheme, r.rate_bps_hz, r.stderr, r.n_slots, r.n_dropped);
            }
            info!("wrote {}", path.display());
        }
        Command::Sweep { config, param, values, out, seed } => {
            let file = load(&config)?;
            let values = harness::parse_values(&values)?;
            let records = harness::sweep(&file, &param, &values, seed)?;
            let path = harness::sweep_csv_path(&out, &param);
            harness::write_csv(&path, &records)?;
            info!("wrote {} ({} rows)", path.display(), records.len());
        }
        Command::Validate { quick, seed } => {
            if !quick {
                eprintln!("only the quick suite is available here; the full gate is `cargo test --test acceptance`");
            }
            let checks = harness::validate::run_quick(seed);
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
