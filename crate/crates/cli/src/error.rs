use thiserror::Error;

/// Command failure, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or arguments (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable input or unwritable output (exit 2).
    #[error("{0}")]
    Io(String),
    /// Invalid config, degenerate data or model problems (exit 3).
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<facepipe::Error> for CliError {
    fn from(e: facepipe::Error) -> Self {
        use facepipe::Error as E;
        match e {
            E::Io { .. } | E::PpmHeader(_) | E::PpmTruncated { .. } | E::PpmMaxval(_) => CliError::Io(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
