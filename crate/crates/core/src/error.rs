use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every start branch is infeasible or stuck, even with zero adjustment.
    #[error("no feasible start: the path cannot be completed even without adjustment")]
    NoFeasibleStart,

    #[error("adjustment step too large at sample {sample}: {reason}")]
    StepTooLarge { sample: usize, reason: String },

    #[error("adjustment signal violates its constraints at index {index}: {reason}")]
    SignalViolation { index: usize, reason: String },

    #[error("artifact mismatch: expected provenance {expected}, found {found}")]
    ArtifactMismatch { expected: String, found: String },

    #[error("instance too large for brute force: {0}")]
    InstanceTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoFeasibleStart => 2,
            Error::SignalViolation { .. } | Error::StepTooLarge { .. } => 3,
            Error::ArtifactMismatch { .. } => 4,
            _ => 1,
        }
    }
}
