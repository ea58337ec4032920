//! Sweeps and CSV persistence.

use std::path::{Path, PathBuf};

use super::config::FileConfig;
use super::run::{run_experiment, RunRecord};
use crate::Result;

pub const CSV_HEADER: &str = "scheme,param,value,rate_bps_hz,stderr,n_slots,n_dropped,seed,wall_s";

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One record per scheme for the configuration as given.
pub fn run_records(file: &FileConfig, seed: u64) -> Result<Vec<RunRecord>> {
    let ecfg = file.clone().into_experiment()?;
    Ok(run_experiment(&ecfg, seed)?.iter().map(|run| run.record("none", None)).collect())
}

/// One record per (value, scheme). Every value reuses the master seed, so
/// all points of the sweep see the same channel draws.
pub fn sweep(file: &FileConfig, param: &str, values: &[f64], seed: u64) -> Result<Vec<RunRecord>> {
    if values.is_empty() {
        return Err(crate::Error::Config("sweep values must be nonempty".into()));
    }
    let mut out = Vec::new();
    for &v in values {
        let ecfg = file.with_param(param, v)?.into_experiment()?;
        out.extend(run_experiment(&ecfg, seed)?.iter().map(|run| run.record(param, Some(v))));
    }
    Ok(out)
}

pub fn run_csv_path(out_dir: &Path) -> PathBuf {
    out_dir.join("run.csv")
}

pub fn sweep_csv_path(out_dir: &Path, param: &str) -> PathBuf {
    out_dir.join(format!("sweep_{param}.csv"))
}

/// Parses a comma-separated value list.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| crate::Error::Config(format!("bad sweep value `{s}`: {e}"))))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(crate::Error::Config("sweep values must be nonempty".into()));
    }
    Ok(values)
}
