use std::fmt;

use weakly_coupled::Error as CoreError;

/// Exit code for configuration and schema problems.
pub const EXIT_INVALID: u8 = 2;
/// Exit code for numerical contract violations and failed runs.
pub const EXIT_FAILED: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed configuration, with location or field path.
    Schema(String),
    /// Well-formed configuration rejected by the library's validation.
    Invalid(CoreError),
    /// A numerical invariant failed during the computation.
    Contract(String),
    /// Output could not be written.
    Io(String),
    /// Self-test items that failed.
    SelfTest(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) | CliError::Invalid(_) => EXIT_INVALID,
            CliError::Contract(_) | CliError::Io(_) | CliError::SelfTest(_) => EXIT_FAILED,
        }
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid configuration: {m}"),
            CliError::Invalid(e) => write!(f, "invalid input: {e}"),
            CliError::Contract(m) => write!(f, "invariant violated: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::SelfTest(items) => write!(f, "self-test failed: {}", items.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Contract(_) | CoreError::Numerical(_) => CliError::Contract(e.to_string()),
            CoreError::Parse(m) => CliError::Schema(m),
            other => CliError::Invalid(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
