use std::path::PathBuf;

use crate::complex::Violation;

pub type Result<T, E = EctError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum EctError {
    #[error("invalid simplicial complex: {}", describe(.0))]
    InvalidComplex(Vec<Violation>),

    #[error("direction has norm {norm}, expected a unit vector")]
    NonUnitDirection { norm: f64 },

    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimization diverged at step {step} (loss {loss}, initial {initial})")]
    Divergence { step: usize, loss: f64, initial: f64 },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl EctError {
    /// Process exit status for the command-line tool: 1 for invalid input,
    /// 2 for I/O and parse failures, 3 for divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            EctError::Io { .. } | EctError::Parse { .. } => 2,
            EctError::Divergence { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EctError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        EctError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

fn describe(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    let mut out = shown.join("; ");
    if violations.len() > 3 {
        out.push_str(&format!(" (+{} more)", violations.len() - 3));
    }
    out
}
