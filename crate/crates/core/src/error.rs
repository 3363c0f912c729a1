use std::path::PathBuf;

/// Errors raised across the crate.
///
/// [`Error::is_input_error`] separates malformed inputs (exit code 2 in the
/// CLI) from failures during computation (exit code 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("unsupported smoothness nu = {0}; supported values are 1 and 2")]
    UnsupportedSmoothness(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("location ({x}, {y}) lies outside the mesh")]
    OutsideMesh { x: f64, y: f64 },

    #[error("point estimate is constant ({0}); contour levels are undefined, supply explicit levels or a non-constant field")]
    ConstantField(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::UnsupportedSmoothness(_)
                | Error::OutsideMesh { .. }
                | Error::DimensionMismatch { .. }
                | Error::Asymmetric { .. }
                | Error::DegenerateMesh(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
