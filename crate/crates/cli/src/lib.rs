//! Batch commands: `generate` datasets, `stats` over them, and `metrics`
//! on their motion files.

pub mod evaluate;
pub mod generate;
pub mod settings;
pub mod stats;

use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use evaluate::{cmd_metrics, MetricsOptions, MetricsReport};
pub use generate::{cmd_generate, Manifest};
pub use settings::{config_schema, load_config, Overrides};
pub use stats::cmd_stats;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("no simulations found in {0}")]
    EmptyDataset(String),
    #[error("{0}")]
    Usage(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Core(#[from] groupsim_core::Error),
}

macro_rules! core_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

core_error!(
    groupsim_core::randomization::RandomError,
    groupsim_core::catalog::CatalogError,
    groupsim_core::authoring::AuthoringError,
    groupsim_core::dynamics::DynamicsError,
    groupsim_core::export::ExportError,
    groupsim_core::metrics::MetricsError
);

/// Hex SHA-256 and length of a file's contents.
pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::open(path).map_err(io)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(io)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}
