pub mod arith;
pub mod cmsetup;
pub mod conditions;
pub mod error;
pub mod ff;
pub mod hfield;
pub mod numeric;
pub mod prover;
pub mod qfield;

pub use error::{Error, Result};
