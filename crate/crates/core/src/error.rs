use std::path::PathBuf;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    InvalidVertex {
        vertex: VertexId,
        vertex_count: usize,
    },

    #[error("no arc {from} -> {to}")]
    MissingArc { from: VertexId, to: VertexId },

    #[error("vertices {a} and {b} do not form a mutual dyad")]
    NotMutual { a: VertexId, b: VertexId },

    #[error("vertex {vertex} has out-degree {degree}, need at least {required}")]
    InsufficientDegree {
        vertex: VertexId,
        degree: usize,
        required: usize,
    },

    #[error("invalid value: {0}")]
    Domain(String),

    /// Pearson correlation with zero variance on one side.
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by inputs with no usable signal (regular
    /// degree sequences, empty dyad sets) rather than by invalid data.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::UndefinedCorrelation(_) | Error::Degenerate(_))
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
