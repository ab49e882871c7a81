use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("{what} would need {needed}, cap is {cap}")]
    Cap {
        what: &'static str,
        needed: String,
        cap: u64,
    },

    #[error("ill-formed #-formula at {path}: {msg}")]
    IllFormed { path: String, msg: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub(crate) fn cap(what: &'static str, needed: impl ToString, cap: u64) -> Self {
        Error::Cap {
            what,
            needed: needed.to_string(),
            cap,
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
