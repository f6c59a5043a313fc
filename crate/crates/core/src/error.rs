//! Error type shared by every stage of the toolkit.

use std::path::PathBuf;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An index or size fell outside the admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// Operand shapes do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// The input carries no usable information (zero variance, zero vector, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The thresholded rank of a system matrix is zero.
    #[error("rank deficiency: rk_delta = 0 for delta = {delta:e}")]
    RankDeficient {
        /// Threshold that annihilated every singular value.
        delta: f64,
    },

    /// A sample was NaN or infinite.
    #[error("non-finite sample at index {index}")]
    NonFinite {
        /// 1-based sample index.
        index: usize,
    },

    /// Gradient descent produced a non-finite loss.
    #[error("training diverged at iteration {iteration}")]
    Training {
        /// 0-based epoch at which the loss stopped being finite.
        iteration: usize,
    },

    /// A closed-loop forecast blew up.
    #[error("forecast diverged at step {step}")]
    Divergence {
        /// 1-based forecast step.
        step: usize,
    },

    /// The dense eigensolver did not converge.
    #[error("eigensolver failed on a {0}x{0} matrix")]
    Eigen(usize),

    /// Invalid configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// CSV or config text could not be parsed.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        /// 1-based physical row in the file.
        row: usize,
        /// Column name or index.
        column: String,
        /// What went wrong.
        message: String,
    },

    /// Model file has an unsupported format version.
    #[error("unsupported model format version {found} (expected {expected})")]
    Version {
        /// Version in the file.
        found: u32,
        /// Version this build reads.
        expected: u32,
    },

    /// Model file is truncated or otherwise unreadable.
    #[error("malformed model file: {0}")]
    Malformed(String),

    /// File system failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        #[source]
        source: std::io::Error,
    },

    /// A pipeline stage failed; the tag names the stage.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        /// Stage name.
        stage: &'static str,
        /// Underlying error.
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps `self` with a stage tag.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
