use jump_spectra::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// 2 for bad input, 3 for numerically undecidable results.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Undecidable(_)
        | CoreError::Contour(_)
        | CoreError::Inconsistency { .. }
        | CoreError::Conditioning(_)
        | CoreError::PoleProximity { .. }
        | CoreError::NotInResolventSet { .. }
        | CoreError::Evaluation { .. } => 3,
        CoreError::DomainMembership { .. } => 1,
        _ => 2,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
