use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region does not intersect the grid with positive area")]
    EmptyEncoding,

    #[error("trajectory `{trajectory}`, term {term}: {source}")]
    Encoding {
        trajectory: String,
        term: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size limit exceeded: {bound} = {value} exceeds cap {cap}")]
    SizeLimit {
        bound: &'static str,
        value: u128,
        cap: u128,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("anonymization infeasible at term {term}: {message}")]
    Infeasible { term: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
