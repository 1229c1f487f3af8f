use std::path::PathBuf;

/// Errors produced anywhere in the coarsening toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph has no labels, so alpha cannot be derived; set it explicitly")]
    MissingLabels,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coarsening ratio {0} is outside (0, 1]")]
    InvalidRatio(f64),
    #[error("ratio {ratio} is below the schedule's minimum ratio {min_ratio}")]
    RatioBelowSchedule { ratio: f64, min_ratio: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("node type `{0}` has no nodes")]
    EmptyType(String),
    #[error("target type `{0}` has no labels")]
    MissingTargetLabels(String),
    #[error("unknown node type `{0}`")]
    UnknownType(String),
    #[error("every compared eigenvalue is numerically zero")]
    AllZeroEigenvalues,
    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),
    #[error("graph with {n} nodes exceeds the dense eigensolver limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The distance between the compared points is zero. `limit` is the value
    /// the probability takes by continuity.
    #[error("zero distance (limit value {limit})")]
    ZeroDistance { limit: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by unreadable or malformed input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io { .. } | Error::Schema(_) | Error::Json(_)
        )
    }
}
