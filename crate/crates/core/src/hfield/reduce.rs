//! The reduction map O_H → O_H/p_k ≅ Z/F_k.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{HElem, KElem};
use crate::error::{Error, Result};
use crate::hfield::local::mod_inverse;
use crate::qfield::Case;

/// Images of √D and ξ modulo F_k, fixed by π_k ≡ 0 and p_k ≡ 0.
#[derive(Clone, Debug)]
pub struct PkReduction {
    pub n: BigInt,
    pub sqrt_d: BigInt,
    pub xi: BigInt,
}

impl PkReduction {
    pub fn new(case: &Case, k: u64) -> Result<Self> {
        Self::with_modulus(case, k, case.f_k(k))
    }

    pub fn with_modulus(case: &Case, k: u64, n: BigInt) -> Result<Self> {
        let pi = case.pi_k(k);
        let vi = mod_inverse(&pi.b, &n).ok_or_else(|| Error::Precondition("v(π_k) not invertible".into()))?;
        let sqrt_d = (-&pi.a * vi).mod_floor(&n);
        let two_inv = mod_inverse(&BigInt::from(2), &n).ok_or_else(|| Error::Precondition("even modulus".into()))?;
        let alpha = ((&case.alpha.a + &case.alpha.b * &sqrt_d) * &two_inv).mod_floor(&n);
        let ak = alpha.modpow(&BigInt::from(k), &n);
        let xi = mod_inverse(&ak, &n).ok_or_else(|| Error::Precondition("α not invertible".into()))?;
        Ok(PkReduction { n, sqrt_d, xi })
    }

    fn rat(&self, r: &num_rational::BigRational) -> Option<BigInt> {
        let di = mod_inverse(&r.denom().mod_floor(&self.n), &self.n)?;
        Some((r.numer() * di).mod_floor(&self.n))
    }

    pub fn reduce_k(&self, k: &KElem) -> Option<BigInt> {
        Some((self.rat(&k.x)? + self.rat(&k.y)? * &self.sqrt_d).mod_floor(&self.n))
    }

    /// Image of h, or None if a denominator is not invertible modulo n.
    pub fn reduce(&self, h: &HElem) -> Option<BigInt> {
        let mut acc = BigInt::zero();
        for c in h.c.iter().rev() {
            acc = (acc * &self.xi + self.reduce_k(c)?).mod_floor(&self.n);
        }
        Some(acc)
    }

    /// Sanity check: ξ satisfies its minimal polynomial modulo n.
    pub fn check(&self, case: &Case) -> bool {
        let x = &self.xi;
        let v = x * x * x + BigInt::from(case.c1) * x + BigInt::from(case.c0);
        v.mod_floor(&self.n).is_zero() && (&self.sqrt_d * &self.sqrt_d - BigInt::from(case.d)).mod_floor(&self.n).is_zero()
            || self.n.is_one()
    }
}
