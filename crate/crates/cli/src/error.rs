use beamcast_core::gru::{GruError, ModelFileError};
use beamcast_core::ingest::IngestError;
use beamcast_core::sim::SimError;
use beamcast_core::sweep::SweepError;
use beamcast_core::train::TrainError;

/// Failure classes with stable exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {}", path.display(), e))
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::DivergedLoss { .. } | TrainError::Gru(GruError::NonFinite) => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<GruError> for CliError {
    fn from(e: GruError) -> Self {
        TrainError::Gru(e).into()
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        CliError::Invalid(format!("model file: {}", e))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::Invalid(e.to_string())
    }
}
