use lfpp_core::LfppError;

/// Failures mapped onto the exit codes: 1 for bad input, 2 for runtime trouble.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<LfppError> for CliError {
    fn from(e: LfppError) -> Self {
        use LfppError::*;
        match e {
            InvalidSpec(_)
            | InvalidArgument(_)
            | OutOfDomain(_)
            | MollificationTooFine { .. }
            | EmptyRegion
            | OutOfRegion(_)
            | DegenerateAnnulus { .. }
            | InsufficientTrials(_)
            | DegenerateFit(_)
            | NotCovered => CliError::Invalid(e.to_string()),
            Format(_) | Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
