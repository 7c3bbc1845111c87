use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedRow { path: PathBuf, line: u64, message: String },

    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("unknown label `{label}` (scheme admits: {admitted})")]
    UnknownLabel { label: String, admitted: String },

    #[error("duplicate cell for visit `{visit}` and rater `{rater}`")]
    DuplicateCell { visit: String, rater: String },

    #[error("duplicate visit id `{0}`")]
    DuplicateVisit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no data: {0}")]
    Empty(String),

    #[error("statistic is undefined on the full dataset")]
    UndefinedStatistic,

    #[error("all {0} bootstrap replicates were undefined")]
    AllReplicatesUndefined(usize),

    #[error("model is not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("complete separation: the outcome is perfectly predicted by the score")]
    Separation,

    #[error("optimizer failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("{failed} of {replicates} replicate fits failed (budget {budget})")]
    ReplicateFailures {
        failed: usize,
        replicates: usize,
        budget: usize,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// True for failures of an estimator on otherwise valid input
    /// (non-convergence, separation, undefined statistics).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UndefinedStatistic
                | Error::AllReplicatesUndefined(_)
                | Error::Separation
                | Error::NoConvergence(_)
                | Error::ReplicateFailures { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
