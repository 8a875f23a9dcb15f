use std::path::PathBuf;

use thiserror::Error;

use crate::grid::BinIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("point ({lon}, {lat}) lies outside the grid bounding box")]
    OutOfBounds { lon: f64, lat: f64 },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("label id {id} out of range for a vocabulary of {len}")]
    LabelId { id: usize, len: usize },

    #[error("year index {index} out of range for a time axis of {count} years")]
    YearIndex { index: usize, count: usize },

    #[error("bin ({}, {}) is not part of the occupied support", .0.i, .0.j)]
    NotInSupport(BinIndex),

    #[error("Gi* needs at least 2 occupied bins, got {0}")]
    TooFewBins(usize),

    #[error("Mann-Kendall needs at least 2 observations, got {0}")]
    SeriesTooShort(usize),

    #[error("series contains a non-finite value at position {0}")]
    NonFinite(usize),

    #[error("region does not intersect the grid")]
    RegionOutsideGrid,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("could not write {}: {source}", .path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
