//! Experiment orchestration: configuration, the frame loop, Monte Carlo
//! averaging, sweeps and CSV output.

mod config;
mod output;
mod run;
mod seed;
pub mod validate;

pub use config::{ExperimentConfig, FileConfig, SchemeId, ThetaInit};
pub use output::{parse_values, run_csv_path, run_records, sweep, sweep_csv_path, write_csv, CSV_HEADER};
pub use run::{run_experiment, run_scheme, run_super_frame, summarize, RunRecord, SchemeRun, SlotResult, SuperFrameOutcome};
pub use seed::{derive_seed, rng_for, stream};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "RIS_SWIPT_THREADS";

/// Installs the global thread pool from `RIS_SWIPT_THREADS` when set.
pub fn init_threads() -> crate::Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| crate::Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(crate::Error::Config(format!("{THREADS_ENV} must be positive")));
    }
    // a second initialization keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
