use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] formflow::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl CliError {
    /// 2 config, 3 input format, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use formflow::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Output { .. } => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::Usage(_) | E::Validation(_) | E::Capacity { .. } => EXIT_CONFIG,
                E::Numeric { .. } | E::Singular(_) => EXIT_NUMERIC,
                E::Format { .. }
                | E::Io { .. }
                | E::Unsupported(_)
                | E::Structural(_)
                | E::Orientation(_)
                | E::Degeneracy { .. }
                | E::Topology(_) => EXIT_INPUT,
            },
        }
    }
}
