use std::path::PathBuf;

use datapal_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the inputs are well-formed but no palette can satisfy them.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Core(CoreError::RefinementFailed { .. } | CoreError::FilterUnsatisfiable { .. })
        )
    }

    /// Process exit code: 2 for infeasible constraints, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        if self.is_infeasible() {
            2
        } else {
            1
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
