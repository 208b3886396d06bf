use std::fmt;

use oldroyd_core::Error;

/// Process exit codes.
pub mod code {
    pub const OK: u8 = 0;
    /// At least one estimate check did not pass.
    pub const CHECK_FAILED: u8 = 1;
    /// Invalid configuration, arguments or input file.
    pub const INVALID: u8 = 2;
    /// The solver detected blow-up; the partial trajectory was written.
    pub const BLOW_UP: u8 = 3;
    /// I/O failure, or an output location exists and `--force` was not given.
    pub const IO: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: code::INVALID,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: code::IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => code::IO,
            Error::BlowUp { .. } => code::BLOW_UP,
            _ => code::INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
