//! Error classification and the exit-code contract.
//!
//! ```text
//! 0  success
//! 2  configuration error (parse, validation, bound violations)
//! 3  infeasible design (truncation, degenerate subdomain, rate)
//! 4  numeric fault during integration or post-processing
//! ```

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Design(String),
    Numeric(String),
    Io(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Design(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Design(msg) => write!(f, "design error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric fault: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl From<heatstab::Error> for CliError {
    fn from(e: heatstab::Error) -> Self {
        use heatstab::Error::*;
        match e {
            TruncationTooSmall(_) | DegenerateSubdomain(_) | InfeasibleRate(_) => {
                CliError::Design(e.to_string())
            }
            NumericFault(_) | NoFit(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
