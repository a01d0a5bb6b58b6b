use schulze_core::generators::GeneratorError;
use schulze_core::ingest::IngestError;
use schulze_core::oracles::OracleError;
use schulze_core::schulze::SchulzeError;
use schulze_core::tournament::TournamentError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Tournament(#[from] TournamentError),
    #[error(transparent)]
    Schulze(#[from] SchulzeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("winner sets differ across runs of m={m}, density={density}")]
    Inconsistent { m: usize, density: f64 },
}

impl CliError {
    /// 2: usage or invalid parameters, 3: unreadable or malformed input,
    /// 4: computation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Generator(GeneratorError::OddWeight { .. }) => 3,
            CliError::Generator(_) => 2,
            CliError::Io { .. }
            | CliError::Ingest(_)
            | CliError::Tournament(_)
            | CliError::Csv(_)
            | CliError::Json(_) => 3,
            CliError::Schulze(_) | CliError::Oracle(_) | CliError::Inconsistent { .. } => 4,
        }
    }
}
