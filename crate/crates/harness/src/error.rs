use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qvar_core::Error),
    #[error("{context}: {source}")]
    At {
        context: String,
        #[source]
        source: qvar_core::Error,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: usage and config problems are `2`, everything
    /// else that aborts a run is `1`.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn at(context: impl Into<String>) -> impl FnOnce(qvar_core::Error) -> HarnessError {
        let context = context.into();
        move |source| HarnessError::At { context, source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
