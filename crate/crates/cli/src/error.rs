use std::fmt;

use ecofollower::data::DataError;
use ecofollower::ddpg::DdpgError;
use ecofollower::eval::EvalError;
use ecofollower::fuel::FuelError;
use ecofollower::idm::IdmError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Usage = 1,
    Input = 2,
    Empty = 3,
    Numeric = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Usage,
            message: msg.into(),
        }
    }
    pub fn input(msg: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Input,
            message: msg.into(),
        }
    }
    pub fn empty(msg: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Empty,
            message: msg.into(),
        }
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Numeric,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Argument(_) => Self::usage(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<FuelError> for CliError {
    fn from(e: FuelError) -> Self {
        Self::input(format!("fuel model: {e}"))
    }
}

impl From<IdmError> for CliError {
    fn from(e: IdmError) -> Self {
        match e {
            IdmError::Calibration(_) => Self::numeric(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<DdpgError> for CliError {
    fn from(e: DdpgError) -> Self {
        match e {
            DdpgError::Load(_) | DdpgError::Shape(_) => Self::input(e.to_string()),
            DdpgError::Argument(_) => Self::usage(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::AllFailed(_) => Self::numeric(e.to_string()),
            EvalError::Argument(_) => Self::usage(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(format!("json error: {e}"))
    }
}
