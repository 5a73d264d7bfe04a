use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid number of salesmen m = {m} for {n_cities} cities")]
    InvalidM { m: usize, n_cities: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("infeasible solution: {0}")]
    Infeasible(String),

    #[error("restricted problem too large for enumeration: {routes} routes (max {max})")]
    TooLarge { routes: usize, max: usize },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
