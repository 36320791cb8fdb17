use thiserror::Error;

use crate::config::ConfigErrors;
use crate::privacy::GateFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite entry at coordinate {0}")]
    NonFinite(usize),

    /// Quantizer input outside `[-G, G]`; callers must clip first.
    #[error("value {value} outside quantizer range [-{bound}, {bound}]")]
    OutOfRange { value: f64, bound: f64 },

    #[error("bin index {index} outside [0, {max}]")]
    BinIndex { index: u64, max: u64 },

    /// The Theorem-1 validity gate does not hold, so no ε guarantee exists.
    #[error("accountant invalid: {0}")]
    AccountantInvalid(GateFailure),

    #[error("client subset is empty")]
    EmptySubset,

    #[error("client {client} out of range for {n} clients")]
    UnknownClient { client: usize, n: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("allocation infeasible: {0}")]
    InfeasibleAllocation(String),

    #[error("search space empty: {0}")]
    EmptySearchSpace(String),

    #[error("search space too large for exhaustive enumeration ({0} grid points per client)")]
    SearchSpaceTooLarge(u64),

    #[error(transparent)]
    Config(#[from] ConfigErrors),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
