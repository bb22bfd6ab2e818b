use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] avgreen::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Io { .. } => 2,
            CliError::Core(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "invalid_input",
            CliError::Core(avgreen::Error::InvalidInput(_)) => "invalid_input",
            CliError::Core(avgreen::Error::Inadmissible(_)) => "inadmissible",
            CliError::Core(avgreen::Error::Quadrature { .. }) => "quadrature",
            CliError::Core(avgreen::Error::Numerical(_)) => "numerical",
            CliError::Io { .. } => "io",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
