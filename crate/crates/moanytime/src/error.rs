use std::path::PathBuf;

/// Errors of the IO, analysis and command-line layer. Each variant belongs to
/// one class with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] moanytime_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Metadata { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("indicator input error: {0}")]
    IndicatorInput(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("data coverage error: {0}")]
    Coverage(String),
    #[error("duplicate run: {0}")]
    DuplicateRun(String),
    #[error("logger error: {0}")]
    Logger(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 indicator input, 4
    /// dimensionality, 5 data coverage, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use moanytime_core::Error as C;
        match self {
            Error::Config(_) => 2,
            Error::IndicatorInput(_) => 3,
            Error::Dimension(_) | Error::Core(C::UnsupportedDimension { .. }) => 4,
            Error::Coverage(_) => 5,
            _ => 1,
        }
    }
}
