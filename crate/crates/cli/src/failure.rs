use std::fmt;

use sharpq::Error;

/// Why a command stopped; each kind maps to its own exit status.
#[derive(Debug)]
pub enum Failure {
    Library(Error),
    /// Missing flags or unreadable files.
    Input(String),
    Disagreement(String),
    /// Emitted output failed its own re-check.
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Library(Error::Cap { .. }) => 3,
            Failure::Library(Error::Invariant(_)) | Failure::Verification(_) => 5,
            Failure::Library(_) | Failure::Input(_) => 2,
            Failure::Disagreement(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Library(e) => write!(f, "{e}"),
            Failure::Input(m) => write!(f, "{m}"),
            Failure::Disagreement(m) => write!(f, "engines disagree: {m}"),
            Failure::Verification(m) => write!(f, "output failed verification: {m}"),
        }
    }
}
