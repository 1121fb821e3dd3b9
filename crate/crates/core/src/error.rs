use alloc::string::String;
use alloc::vec::Vec;

use crate::perm::Cell;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The requested exact computation is too large.
    #[error("capacity exceeded: {what} is {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("size mismatch: expected n = {expected}, found n = {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is too far from Boolean for the recovery step to apply.
    #[error("not near-Boolean: {0}")]
    NotNearBoolean(String),

    /// A structural hypothesis of the analysis does not hold for this input.
    #[error("premise violated: {detail}")]
    PremiseViolated { detail: String, cells: Vec<Cell> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn premise(detail: impl Into<String>, cells: Vec<Cell>) -> Self {
        Error::PremiseViolated {
            detail: detail.into(),
            cells,
        }
    }

    pub fn is_premise_violation(&self) -> bool {
        matches!(self, Error::PremiseViolated { .. } | Error::NotNearBoolean(_))
    }
}
