//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any stage of the pipeline.
///
/// `Validation` and `Parse` indicate bad inputs (configs, files, argument
/// combinations); everything else is a runtime failure. The CLI maps the
/// former to exit code 2 and the latter to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("filter design error: {0}")]
    FilterDesign(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn design(msg: impl Into<String>) -> Self {
        Error::FilterDesign(msg.into())
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by invalid user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_) | Error::Parse { .. } => true,
            Error::FilterDesign(_) | Error::Io(_) => false,
            Error::Stage { source, .. } => source.is_validation(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
