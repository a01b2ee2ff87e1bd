use std::fmt;

/// Process exit statuses. Stable: scripts depend on them.
pub mod exit {
    pub const OK: u8 = 0;
    /// Offline verdict: no schedule meets every due date.
    pub const INFEASIBLE: u8 = 1;
    /// A deciding comparison fell inside the tolerance band.
    pub const INDETERMINATE: u8 = 2;
    /// Bad flags, unreadable or malformed input, invalid parameters.
    pub const USAGE: u8 = 64;
    /// The computation itself failed (budget or horizon exhausted, I/O on output).
    pub const SOFTWARE: u8 = 70;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: exit::USAGE,
            message: message.into(),
        }
    }

    pub fn software(message: impl Into<String>) -> Self {
        CliError {
            code: exit::SOFTWARE,
            message: message.into(),
        }
    }

    /// Prefixes the message, e.g. with the file being processed.
    pub fn context(mut self, prefix: impl fmt::Display) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<procrastinate::Error> for CliError {
    fn from(e: procrastinate::Error) -> Self {
        use procrastinate::Error as E;
        let code = match e {
            E::Domain(_)
            | E::Parameter(_)
            | E::InvalidInstance(_)
            | E::Unsupported(_)
            | E::Config(_)
            | E::Parse(_)
            | E::SearchBudget { .. } => exit::USAGE,
            _ => exit::SOFTWARE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::software(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::software(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
