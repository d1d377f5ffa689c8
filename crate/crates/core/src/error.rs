use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("xml error at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },

    #[error("structural error: {0}")]
    Structural(String),

    /// Argument or lookup outside the domain of an operation (unknown ids,
    /// out-of-range coordinates, non-positive parameters).
    #[error("{0}")]
    Domain(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("spawn node {node} is occupied by {actor_id}")]
    Occupied { node: String, actor_id: String },

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("region {region} is not adjacent to the current roi")]
    NotEligible {
        region: String,
        eligible: Vec<String>,
    },

    #[error("region {0} is already part of the roi")]
    AlreadyInRoi(String),

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("scenario references map {map_id} with digest {expected}, cache holds {actual}")]
    StaleMap {
        map_id: String,
        expected: String,
        actual: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(vec![msg.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code, used in service error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Xml { .. } => "xml",
            Error::Structural(_) => "structural",
            Error::Domain(_) => "domain",
            Error::Validation(_) => "validation",
            Error::Occupied { .. } => "occupied",
            Error::Conflict(_) => "conflict",
            Error::NotEligible { .. } => "not_eligible",
            Error::AlreadyInRoi(_) => "already_in_roi",
            Error::Planning(_) => "planning",
            Error::Format(_) => "format",
            Error::StaleMap { .. } => "stale_map",
            Error::Io { .. } => "io",
        }
    }
}
