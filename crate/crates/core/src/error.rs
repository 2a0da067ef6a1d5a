use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid triplet: {0}")]
    InvalidTriplet(ValidationReport),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wrong engine: {0}")]
    WrongEngine(String),

    #[error("not a lattice chain: {0}")]
    NotLattice(String),

    #[error("truncation floor not certified: bound {bound:e} at floor {floor}")]
    TruncationNotCertified { floor: u32, bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
