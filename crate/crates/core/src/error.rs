use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Range`, `InvalidArgument`, `Parse` and `Undefined` are input problems;
/// `Numerical` marks a computation that ran but could not produce an answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range {range}")]
    Range {
        what: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Undefined(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: impl ToString, range: &'static str) -> Self {
        Error::Range {
            what,
            value: value.to_string(),
            range,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
