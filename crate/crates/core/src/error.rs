use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by geometry, resampling, fitting and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("degenerate polygon: signed area is zero")]
    DegeneratePolygon,

    #[error("origin ({x}, {y}) lies outside the polygon")]
    OriginOutside { x: f64, y: f64 },

    #[error("polygon is not star-shaped about the origin (vertex {vertex} breaks angular order)")]
    NotStarShaped { vertex: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("value overflowed while decoding: {0}")]
    Overflow(&'static str),

    #[error("ray {ray} does not intersect the polygon boundary")]
    NoHit { ray: usize },

    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    #[error("degenerate bracketing for ray {ray}")]
    DegenerateBracket { ray: usize },

    #[error("profiles are not comparable: {0}")]
    ProfileMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("fit diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("batch element {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("polygon '{id}': {reason}")]
    Document { id: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for failures caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::NonFinite(_) | Error::Overflow(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
