use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter mismatch: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric precision insufficient: {0}")]
    Precision(String),
    #[error("norm factorization left an unfactored residue {residue}")]
    Unfactored { residue: BigInt },
    #[error("period bound {bound} exceeds the loop budget {budget}")]
    Budget { bound: BigInt, budget: u64 },
    #[error("unsupported curve: {0}")]
    UnsupportedCurve(String),
    #[error("k = {0} is not admissible")]
    UnsupportedK(u64),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
