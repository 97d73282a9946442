use glspiral::ErrorFamily;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Validation { field: String, line: Option<usize>, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] glspiral::Error),
    #[error("{0}")]
    Io(String),
}

impl From<glspiral::io::IoError> for CliError {
    fn from(e: glspiral::io::IoError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    /// Process exit status: 1 configuration, 2 solver, 3 numerical guard, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Usage(_) => 1,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e.family() {
                ErrorFamily::Config => 1,
                ErrorFamily::Solver => 2,
                ErrorFamily::NumericalGuard => 3,
                ErrorFamily::Io => 4,
            },
        }
    }
}
