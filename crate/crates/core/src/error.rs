use thiserror::Error;

use crate::optimizer::TrainTrace;

pub type Result<T> = std::result::Result<T, MlcError>;

#[derive(Debug, Error)]
pub enum MlcError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Ranking quantities are undefined when a sample has no relevant or no
    /// irrelevant label.
    #[error("degenerate label vector: ranking loss needs at least one relevant and one irrelevant label")]
    Degenerate,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: label id {id} out of range for {n_labels} labels")]
    LabelRange { line: usize, id: usize, n_labels: usize },

    #[error("training diverged at epoch {epoch} (objective {objective})")]
    Diverged {
        epoch: usize,
        objective: f64,
        trace: Box<TrainTrace>,
    },

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MlcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MlcError::InvalidInput(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(MlcError::Dimension { expected, got })
    }
}
