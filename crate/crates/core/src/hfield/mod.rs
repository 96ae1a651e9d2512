//! Arithmetic in the Hilbert class field H = K(ξ), its primes, and the
//! quadratic symbol s_k.

mod elem;
pub mod local;
mod primes;
mod reduce;
pub mod symbol;
pub mod twoadic;

pub use elem::{p_k_elem, poly_eval, HElem, HField, KElem};
pub use primes::{primes_above, primes_over, KLevel, PrimeFactor, PrimeIdealH};
pub use reduce::PkReduction;
pub use symbol::{s_k, symbol_period, PeriodicSet, SymbolEngine};
pub use twoadic::TwoAdicQuotient;
