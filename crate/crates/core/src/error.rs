//! Error type shared by all numerical modules.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole at {0}")]
    Pole(f64),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("no convergence: {what} (partial value {partial:e}, estimate {estimate:e})")]
    Convergence {
        what: String,
        partial: f64,
        estimate: f64,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("field does not decay at the box boundary: max |u| = {0:e}")]
    Tail(f64),
    #[error("stencil does not fit: {0}")]
    Stencil(String),
    #[error("extrapolation failed: {0}")]
    Extrapolation(String),
    #[error("invalid ladder: {0}")]
    Ladder(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
