use misinfo_core::annotation::Phase;
use thiserror::Error;

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),

    #[error("invalid request: {0}")]
    Invalid(String),

    #[error("{annotator} already annotated tweet {tweet} in the {phase} phase")]
    Duplicate {
        tweet: String,
        annotator: String,
        phase: Phase,
    },

    #[error("tweet {tweet} is not assigned to {annotator} in the {phase} phase")]
    NotAssigned {
        tweet: String,
        annotator: String,
        phase: Phase,
    },

    #[error("storage failure: {0}")]
    Storage(String),
}

impl From<misinfo_core::Error> for ServiceError {
    fn from(e: misinfo_core::Error) -> Self {
        if e.is_io() {
            ServiceError::Storage(e.to_string())
        } else {
            ServiceError::Invalid(e.to_string())
        }
    }
}
