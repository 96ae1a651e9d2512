//! Parameter files, result logs, certificate replay and the range
//! operations behind the `cmprime` command.

pub mod cert;
pub mod log;
pub mod ops;
pub mod params;
pub mod replay;
