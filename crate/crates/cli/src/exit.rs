use std::fmt;

use cmc_core::Error;

pub const OK: u8 = 0;
pub const INVALID: u8 = 1;
pub const NOT_ADMISSIBLE: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const VERIFICATION: u8 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(INVALID, message)
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
            Error::InvalidInput(_) | Error::SignatureUnavailable(_) | Error::DomainError { .. } => {
                INVALID
            }
            Error::DomainExit { .. }
            | Error::NumericalFailure(_)
            | Error::DegenerateComplement { .. } => NUMERICAL,
            Error::DegenerateSample(_) => VERIFICATION,
        };
        Self::new(code, e.to_string())
    }
}
