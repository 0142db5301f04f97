//! CLI error classification with the stable exit-status contract:
//! 0 success, 2 usage/config, 3 data, 4 numerical.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<tvhgarch::Error> for CliError {
    fn from(e: tvhgarch::Error) -> Self {
        use tvhgarch::Error::*;
        match e {
            Domain(m) | UnsupportedOrders(m) => CliError::Usage(m),
            DegenerateData(m) | InsufficientData(m) => CliError::Data(m),
            Numerical(m) | SingularInformation(m) => CliError::Numerical(m),
            DegenerateTest(m) => CliError::Numerical(format!("score test unavailable: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
