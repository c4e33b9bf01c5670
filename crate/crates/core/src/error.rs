use crate::model::{JobId, ServerId, Time};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid job {id}: {reason}")]
    InvalidJob { id: JobId, reason: String },

    #[error("duplicate job id {0}")]
    DuplicateJob(JobId),

    #[error("capacity must be at least 1")]
    ZeroCapacity,

    #[error("infeasible placement at t={time} for job {job}: {reason}")]
    InfeasiblePlacement {
        time: Time,
        job: JobId,
        server: Option<ServerId>,
        reason: String,
    },

    #[error("instance too large for oracle: {jobs} jobs, limit {limit}")]
    OracleTooLarge { jobs: usize, limit: usize },

    #[error("bound check for {expected} applied to a run of '{found}'")]
    WrongStrategy {
        expected: &'static str,
        found: String,
    },

    #[error("invalid strategy '{0}'")]
    InvalidStrategy(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
