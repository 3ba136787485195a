use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Everything that ends a command early, grouped by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Solver, fit or analysis failure. Exit 1.
    Numerical(indentfit::Error),
    /// Unreadable or unwritable path. Exit 2.
    Io { path: PathBuf, message: String },
    /// Malformed config or input file. Exit 2.
    Config(String),
    /// An artifact an earlier stage should have produced is missing. Exit 3.
    MissingArtifact { path: PathBuf, hint: String },
}

impl Failure {
    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Numerical(_) => 1,
            Self::Io { .. } | Self::Config(_) => 2,
            Self::MissingArtifact { .. } => 3,
        })
    }
}

impl From<indentfit::Error> for Failure {
    fn from(e: indentfit::Error) -> Self {
        match e {
            indentfit::Error::Format(m) => Self::Config(m),
            other => Self::Numerical(other),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Numerical(e) => write!(f, "{e}"),
            Self::Io { path, message } => write!(f, "{}: {message}", path.display()),
            Self::Config(m) => write!(f, "{m}"),
            Self::MissingArtifact { path, hint } => write!(f, "missing {}: {hint}", path.display()),
        }
    }
}
