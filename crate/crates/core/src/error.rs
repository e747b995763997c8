use thiserror::Error;

/// Errors raised by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("degenerate {dim}-cell {index}: measure {measure:e} below {threshold:e}")]
    Degeneracy {
        dim: usize,
        index: usize,
        measure: f64,
        threshold: f64,
    },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("capacity exhausted: {message} (achieved porosity {achieved_porosity:.6})")]
    Capacity {
        message: String,
        achieved_porosity: f64,
    },

    #[error("numeric failure: {message} (relative residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn format(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
