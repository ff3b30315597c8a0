use std::fmt;

/// Exit codes: 0 success, 1 negative verdict, 2 usage or parse error,
/// 3 capability limit (degree overflow, exhausted search).
pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAPABILITY: u8 = 3;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(error: impl Into<anyhow::Error>) -> CliError {
        CliError { code: EXIT_USAGE, error: error.into() }
    }

    pub fn capability(error: impl Into<anyhow::Error>) -> CliError {
        CliError { code: EXIT_CAPABILITY, error: error.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> CliError {
        CliError::usage(error)
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> CliError {
        CliError::usage(error)
    }
}

impl From<invsep::Error> for CliError {
    fn from(error: invsep::Error) -> CliError {
        use invsep::Error as E;
        let code = match error {
            E::DegreeCapExceeded { .. } | E::Exhausted { .. } | E::GroupTooLarge { .. } | E::Unsupported(_) => {
                EXIT_CAPABILITY
            }
            E::NotSeparating { .. } | E::InsideHull { .. } => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        };
        CliError { code, error: error.into() }
    }
}
