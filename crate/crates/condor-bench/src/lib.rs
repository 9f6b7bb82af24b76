//! Benchmark and verification harness for the ordinal regression toolkit.

pub mod config;
pub mod export;
pub mod fetch;
pub mod run;
pub mod verify;

use std::path::PathBuf;

/// Data directory resolution: `--data-dir` flag, then `CONDOR_DATA_DIR`,
/// then `./data`.
pub fn data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("CONDOR_DATA_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}
