use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

/// Process exit codes. Every exit path maps to exactly one of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    /// A verification check or comparison failed its threshold.
    CheckFailed = 1,
    /// Bad configuration file, flag or environment variable.
    Config = 2,
    /// File system failure or malformed checkpoint / CSV input.
    Io = 3,
    /// The run stopped early because the blow-up detector tripped.
    BlowupSuspected = 4,
    /// The run produced non-finite values.
    NumericalBlowup = 5,
    /// A double sum would exceed its point budget.
    TooExpensive = 6,
    /// Any other error raised by the numerical core.
    Numerical = 7,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] cnqg_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit(&self) -> Exit {
        match self {
            Self::Config { .. } => Exit::Config,
            Self::Io { .. } | Self::Format { .. } => Exit::Io,
            Self::Core(cnqg_core::Error::TooExpensive { .. }) => Exit::TooExpensive,
            Self::Core(cnqg_core::Error::InvalidConfig(_) | cnqg_core::Error::InvalidParameter { .. }) => Exit::Config,
            Self::Core(_) => Exit::Numerical,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
