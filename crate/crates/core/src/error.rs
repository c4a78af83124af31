use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("missing corpus subdirectory {0}")]
    MissingSubdirectory(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column index {index} out of range for {width} columns")]
    ColumnOutOfRange { index: usize, width: usize },

    #[error("column {column} has {levels} distinct values (limit {limit}); discretize it first")]
    NotDiscrete {
        column: usize,
        levels: usize,
        limit: usize,
    },

    #[error("constant column {0}")]
    ConstantColumn(usize),

    #[error("constant response")]
    ConstantResponse,

    #[error("response is not binary")]
    NonBinaryResponse,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure stems from bad inputs rather than a computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Diverged { .. } | Error::ConstantResponse)
    }
}
