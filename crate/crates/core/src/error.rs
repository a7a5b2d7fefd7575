use thiserror::Error;

use crate::parse::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// Input violates a precondition of the operation.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A state that the construction guarantees cannot occur.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("resource limit exceeded: {0}")]
    Limit(String),
    /// Failure inside a named pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
