//! Command-line front end: winner computation, instance generation and a
//! thread-scaling benchmark for `schulze-core`.

pub mod bench;
mod error;
pub mod generate;
pub mod winners;

pub use error::CliError;

use std::fs;
use std::path::Path;

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
