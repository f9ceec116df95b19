use std::path::{Path, PathBuf};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Bad flags or config.
pub const EXIT_USAGE: i32 = 1;
/// Unreadable, malformed or inconsistent input data, or failed output.
pub const EXIT_DATA: i32 = 2;
/// A solver or decomposition failed numerically.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", config_message(path, *line, msg))]
    Config { path: PathBuf, line: usize, msg: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: offd_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: sha256 mismatch (expected {expected}, found {found})", path.display())]
    Checksum { path: PathBuf, expected: String, found: String },
}

fn config_message(path: &Path, line: usize, msg: &str) -> String {
    match (path.as_os_str().is_empty(), line) {
        (true, 0) => format!("config: {msg}"),
        (true, l) => format!("config line {l}: {msg}"),
        (false, 0) => format!("{}: {msg}", path.display()),
        (false, l) => format!("{}:{l}: {msg}", path.display()),
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Core { source, .. } if source.is_numeric() => EXIT_NUMERIC,
            CliError::Core { .. } | CliError::Io { .. } | CliError::Checksum { .. } => EXIT_DATA,
        }
    }
}

/// Attaches a context string to core errors.
pub(crate) trait CoreContext<T> {
    fn during(self, context: impl Into<String>) -> Result<T, CliError>;
}

impl<T> CoreContext<T> for offd_core::Result<T> {
    fn during(self, context: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: context.into(),
            source,
        })
    }
}
