use std::fmt;

use berry_decoherence::Error;

/// Why a run stopped. The variant picks the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad input: unreadable or invalid config, out-of-domain values, a grid
    /// override too coarse for the physics. Exit code 2.
    Config(String),
    /// A quadrature could not reach its error tolerance. Exit code 3.
    Numerical(String),
    /// Writing the output failed. Exit code 1.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalAccuracy { .. } => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}
