use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("boundary normal is undefined at the origin")]
    DegenerateNormal,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("line {line}: key `{key}`: {msg}")]
    Parse { line: usize, key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
