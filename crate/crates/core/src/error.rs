use thiserror::Error;

use crate::verdict::Verdict;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: t = {t} outside the validity range [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("upper conjugate is not well defined: {}", .0.summary())]
    WellDefinedness(Box<Verdict>),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Domain { .. } => "domain",
            Error::Horizon(_) => "horizon",
            Error::Precondition(_) => "precondition",
            Error::WellDefinedness(_) => "well_definedness",
            Error::Internal(_) => "internal",
        }
    }

    pub fn is_domain_like(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Horizon(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
