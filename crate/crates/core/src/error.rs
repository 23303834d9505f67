use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} points, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid trajectory `{id}`: {reason}")]
    InvalidTrajectory { id: String, reason: String },

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("degenerate trajectory `{id}`: endpoint displacement {displacement:e} is not above {eps:e}")]
    DegenerateTrajectory { id: String, displacement: f64, eps: f64 },

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage} training diverged at epoch {epoch} (non-finite loss)")]
    DivergedTraining { stage: &'static str, epoch: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unsupported format version: expected {expected}, found {found}")]
    UnsupportedVersion { expected: u32, found: u32 },

    #[error("malformed model file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}
