//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter lies outside the chart or domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor argument is out of range (radius, waist, offset, level, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mesh fails a structural check (non-manifold edge, orientation, empty).
    #[error("mesh error: {0}")]
    Mesh(String),

    /// The surface fails a geometric precondition (not stationary, contact angle
    /// too close to 0 or pi, boundary not on the ball boundary).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A numerical routine failed to converge or produced an unusable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested operation is not defined for this ambient space or input.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Configuration file problems (unknown keys, bad values, missing fields).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
    pub fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }
    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn not_applicable(msg: impl Into<String>) -> Self {
        Error::NotApplicable(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
