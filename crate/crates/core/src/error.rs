use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated an operation's precondition (dimension mismatch,
    /// assigning an already assigned element, bad parameter, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Exhaustive search would visit more nodes than the caller allowed.
    #[error("node budget exceeded{}: search needs {required} nodes, budget is {budget}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Budget {
        required: u64,
        budget: u64,
        context: Option<String>,
    },

    /// A binary file did not match the expected layout.
    #[error("malformed {kind} file: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    /// A pipeline stage failed; outputs of earlier stages are kept.
    #[error("stage {stage}: {source}")]
    Stage { stage: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// Attach a context label to a budget error; other variants pass through.
    pub(crate) fn with_budget_context(self, label: impl Into<String>) -> Self {
        match self {
            Error::Budget {
                required, budget, ..
            } => Error::Budget {
                required,
                budget,
                context: Some(label.into()),
            },
            other => other,
        }
    }
}
