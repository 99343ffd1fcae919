use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    /// `field` is a dotted path such as `device.kappa`.
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: dqrm_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Signal { path: PathBuf, message: String },

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        use dqrm_core::Error as E;
        match self {
            Self::Config { .. } | Self::Signal { .. } | Self::ChecksFailed(_) => EXIT_VALIDATION,
            Self::Io { .. } => EXIT_IO,
            Self::Core { source, .. } => match source {
                E::DimensionMismatch { .. }
                | E::InvalidTruncation(_)
                | E::DimensionOverflow(_)
                | E::NotSquare { .. }
                | E::InvalidState(_)
                | E::BesselOrder(_)
                | E::BesselArgument(_)
                | E::InvalidParameter { .. }
                | E::ModulationIndex { .. }
                | E::Unreachable { .. }
                | E::TimeGrid
                | E::UnknownObservable(_) => EXIT_VALIDATION,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

/// Attaches scenario context to core results.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for dqrm_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}
