use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two seeds share a coordinate (or a position) in strict general-position mode.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dependence regions have different horizons ({0} vs {1})")]
    MismatchedHorizons(f64, f64),

    #[error("points coincide at ({0}, {1})")]
    CoincidentPoints(f64, f64),

    #[error("unknown seed id {0}")]
    UnknownSeed(usize),

    #[error("horizon {horizon} is below the box side {side}; configuration not frozen inside the box")]
    NotFrozen { horizon: f64, side: f64 },

    #[error("not in general position: {0}")]
    NonGeneralPosition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
