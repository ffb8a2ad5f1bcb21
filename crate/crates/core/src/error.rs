use thiserror::Error;

/// Raised when an evaluation needs a digit beyond an unresolved prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("digit {index} lies beyond the resolved prefix")]
pub struct Unresolved {
    pub index: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base p = {0}: p must be at least 3")]
    InvalidBase(u32),
    #[error("digit {digit} is out of range for base {p}")]
    DigitOutOfRange { digit: u32, p: u32 },
    #[error("omega table for p = {p} must have {expected} entries, got {got}")]
    OmegaLength { p: u32, expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource guard exceeded: {what} needs {needed}, limit is {limit}")]
    Resource {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Unresolved(#[from] Unresolved),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_base(p: u32) -> Result<()> {
    if p < 3 {
        Err(Error::InvalidBase(p))
    } else {
        Ok(())
    }
}
