use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: unknown label `{label}` (expected OFF or NOT)")]
    UnknownLabel { line: usize, label: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("id `{0}` not found")]
    MissingId(String),

    #[error("record `{0}` has no label")]
    Unlabeled(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate signal")]
    DegenerateSignal,

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures that come from the numerical routines rather than
    /// from malformed input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Context { source, .. } => source.is_numeric(),
            Error::DegenerateSignal | Error::Numeric(_) => true,
            _ => false,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
