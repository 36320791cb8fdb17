//! Experiment harness: config loading, allocation, training runs, sweeps and
//! CSV emission.

use std::path::{Path, PathBuf};

use binldp::config::ConfigErrors;
use binldp::{Error as CoreError, ExperimentConfig};
use sha2::{Digest, Sha256};

mod output;
mod pipeline;
mod selftest;
mod sweep;

pub use output::{allocation_record, TrainSummary};
pub use pipeline::{cmd_allocate, cmd_train, execute, prepare, solve, AllocateOutput, PreparedRun, RunOutcome};
pub use selftest::{cmd_selftest, SelftestLine};
pub use sweep::{cmd_sweep, run_sweep, Axis, PointStatus, Quartiles, RunResult, SweepFiles, SweepPoint, SweepResult, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(ConfigErrors),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Config(_) => EXIT_CONFIG,
            Self::Infeasible(_) => EXIT_INFEASIBLE,
            Self::Write { .. } | Self::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn write(path: &Path, source: impl Into<std::io::Error>) -> Self {
        Self::Write {
            path: path.to_path_buf(),
            source: source.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(c) => Self::Config(c),
            CoreError::InfeasibleAllocation(_) | CoreError::AccountantInvalid(_) => {
                Self::Infeasible(e.to_string())
            }
            other => Self::Runtime(other.to_string()),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text).map_err(CliError::Config)
}

/// First 16 hex digits of the SHA-256 of the canonical TOML with the seed
/// zeroed, so runs that differ only in seed share a hash.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.seed = 0;
    let digest = Sha256::digest(c.to_toml_string().as_bytes());
    hex::encode(&digest[..8])
}
