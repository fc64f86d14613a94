use alloc::string::String;

/// Every failure the core can report.
///
/// `Resource` and `NotFound` mean a search or iterate ran out of budget. They
/// never stand for a false declared bound (`BoundViolation`) or for a checker
/// disagreeing with a proved implication (`Unsound`).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("declared bound violated: {what} at index {index} (value {value}, bound {bound})")]
    BoundViolation {
        what: &'static str,
        index: u64,
        value: String,
        bound: String,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("search exhausted in stage `{stage}` without a witness below cap {cap}")]
    NotFound { stage: String, cap: u64 },

    #[error("post-verification failed: {0}")]
    Unsound(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn not_found(stage: impl Into<String>, cap: u64) -> Self {
        Error::NotFound {
            stage: stage.into(),
            cap,
        }
    }

    /// True for outcomes caused by an exhausted budget rather than bad input.
    pub fn is_exhaustion(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::NotFound { .. })
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
