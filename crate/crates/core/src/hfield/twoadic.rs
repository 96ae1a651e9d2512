//! The quotient O_H/l³ at the primes l above 2 and the Hilbert symbol there.

use std::borrow::Cow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{HElem, KElem};
use crate::error::{Error, Result};
use crate::qfield::{Case, TwoPrime};

/// (Z/8)[x]/(x³ + c1·x + c0); each element packed as r0 + 8·r1 + 64·r2.
#[derive(Clone, Debug)]
pub struct TwoAdicQuotient {
    pub prime: TwoPrime,
    c1: u8,
    c0: u8,
    sqrt_d: BigInt,
    sqrt_prec: u32,
    case: Case,
    squares: Vec<bool>,
    unit_squares: Vec<bool>,
}

pub type R8 = u16;

pub const SIZE: usize = 512;

impl TwoAdicQuotient {
    pub fn new(case: &Case, prime: TwoPrime) -> Self {
        let c1 = case.c1.rem_euclid(8) as u8;
        let c0 = case.c0.rem_euclid(8) as u8;
        let sqrt_prec = 256;
        let mut t = TwoAdicQuotient {
            prime,
            c1,
            c0,
            sqrt_d: case.two_adic_sqrt_d(prime, sqrt_prec),
            sqrt_prec,
            case: case.clone(),
            squares: vec![false; SIZE],
            unit_squares: vec![false; SIZE],
        };
        for x in 0..SIZE as R8 {
            let s = t.mul(x, x) as usize;
            t.squares[s] = true;
            if t.is_unit(x) {
                t.unit_squares[s] = true;
            }
        }
        t
    }

    pub fn digits(x: R8) -> [u8; 3] {
        [(x & 7) as u8, ((x >> 3) & 7) as u8, ((x >> 6) & 7) as u8]
    }

    pub fn pack(d: [u8; 3]) -> R8 {
        (d[0] & 7) as R8 | (((d[1] & 7) as R8) << 3) | (((d[2] & 7) as R8) << 6)
    }

    /// Units are the elements outside l = (2), i.e. with some odd digit.
    pub fn is_unit(&self, x: R8) -> bool {
        Self::digits(x).iter().any(|d| d % 2 == 1)
    }

    pub fn add(&self, a: R8, b: R8) -> R8 {
        let (x, y) = (Self::digits(a), Self::digits(b));
        Self::pack([x[0] + y[0], x[1] + y[1], x[2] + y[2]])
    }

    pub fn mul(&self, a: R8, b: R8) -> R8 {
        let (x, y) = (Self::digits(a), Self::digits(b));
        let mut p = [0u32; 5];
        for i in 0..3 {
            for j in 0..3 {
                p[i + j] += x[i] as u32 * y[j] as u32;
            }
        }
        let (c1, c0) = (self.c1 as u32, self.c0 as u32);
        for deg in [4usize, 3] {
            let t = p[deg] % 8;
            p[deg] = 0;
            p[deg - 2] += 8 * 8 - t * c1;
            p[deg - 3] += 8 * 8 - t * c0;
        }
        Self::pack([(p[0] % 8) as u8, (p[1] % 8) as u8, (p[2] % 8) as u8])
    }

    pub fn pow(&self, a: R8, mut e: u64) -> R8 {
        let mut acc: R8 = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// The 2-adic √D on this branch to at least `prec` bits.
    fn sqrt_d_to(&self, prec: u32) -> Cow<'_, BigInt> {
        if prec <= self.sqrt_prec {
            Cow::Borrowed(&self.sqrt_d)
        } else {
            Cow::Owned(self.case.two_adic_sqrt_d(self.prime, prec))
        }
    }

    /// Valuation of a nonzero element of K under this prime's embedding.
    fn k_ord(&self, k: &KElem) -> Result<Option<i64>> {
        if k.is_zero() {
            return Ok(None);
        }
        let den = k.denom();
        let e = den.trailing_zeros().unwrap_or(0) as i64;
        let xn = k.x.numer() * (&den / k.x.denom());
        let yn = k.y.numer() * (&den / k.y.denom());
        // the valuation is at most that of the norm x² − D·y²
        let norm = &xn * &xn - BigInt::from(self.case.d) * &yn * &yn;
        let prec = (norm.bits() as u32 + 1).max(self.sqrt_prec);
        let m = BigInt::from(1) << prec;
        let n = (&xn + &yn * &*self.sqrt_d_to(prec)).mod_floor(&m);
        if n.is_zero() {
            return Err(Error::Precision("2-adic valuation beyond precision".into()));
        }
        Ok(Some(n.trailing_zeros().unwrap() as i64 - e))
    }

    /// ord_l of an element of H.
    pub fn ord(&self, h: &HElem) -> Result<i64> {
        let mut best: Option<i64> = None;
        for c in &h.c {
            if let Some(v) = self.k_ord(c)? {
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best.ok_or_else(|| Error::Precondition("valuation of zero".into()))
    }

    /// Image of h / 2^shift, which must be l-integral.
    pub fn image_scaled(&self, h: &HElem, shift: i64) -> Result<R8> {
        let mut d = [0u8; 3];
        for (i, c) in h.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let den = c.denom();
            let e = den.trailing_zeros().unwrap_or(0) as i64;
            let odd = &den >> e as u64;
            let xn = c.x.numer() * (&den / c.x.denom());
            let yn = c.y.numer() * (&den / c.y.denom());
            let total = e + shift;
            let n = &xn + &yn * &*self.sqrt_d_to(total.max(0) as u32 + 3);
            if total < 0 {
                let t = (n << (-total) as u64) * odd_inverse(&odd);
                d[i] = t.mod_floor(&BigInt::from(8)).to_u8().unwrap();
                continue;
            }
            let m = BigInt::from(1) << (total as u64 + 3);
            let n = n.mod_floor(&m);
            let low = BigInt::from(1) << total as u64;
            if !(&n % &low).is_zero() {
                return Err(Error::Precondition("element not integral at l".into()));
            }
            let t = (n >> total as u64) * odd_inverse(&odd);
            d[i] = t.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        }
        Ok(Self::pack(d))
    }

    pub fn image(&self, h: &HElem) -> Result<R8> {
        self.image_scaled(h, 0)
    }

    /// a normalized to ord 0 or 1 by removing an even power of 2.
    pub fn normalize(&self, a: &HElem) -> Result<R8> {
        let n = self.ord(a)?;
        self.image_scaled(a, 2 * n.div_euclid(2))
    }

    /// Hilbert symbol on normalized images; b must be a unit.
    pub fn hilbert_images(&self, a: R8, b: R8) -> i32 {
        let sq: Vec<R8> = (0..SIZE as R8).map(|x| self.mul(x, x)).collect();
        let ax: Vec<R8> = sq.iter().map(|&s| self.mul(a, s)).collect();
        let by: Vec<R8> = sq.iter().map(|&s| self.mul(b, s)).collect();
        for x in 0..SIZE {
            let xu = self.is_unit(x as R8);
            for y in 0..SIZE {
                let v = self.add(ax[x], by[y]) as usize;
                let hit = if xu || self.is_unit(y as R8) {
                    self.squares[v]
                } else {
                    self.unit_squares[v]
                };
                if hit {
                    return 1;
                }
            }
        }
        -1
    }

    /// (a, b)_l for b an l-unit.
    pub fn hilbert_symbol(&self, a: &HElem, b: &HElem) -> Result<i32> {
        if self.ord(b)? != 0 {
            return Err(Error::Precondition("second argument must be a unit at l".into()));
        }
        let an = self.normalize(a)?;
        let bn = self.image(b)?;
        Ok(self.hilbert_images(an, bn))
    }
}

fn odd_inverse(o: &BigInt) -> BigInt {
    // inverse mod 8 of an odd number is itself
    o.mod_floor(&BigInt::from(8))
}
