//! Small finite fields F_q[z]/(m(z)) with q < 2^63.

use num_bigint::BigUint;

use crate::arith::{factor, inv_mod, mul_mod};
use crate::error::{Error, Result};

/// F_q[z]/(m), m monic irreducible of degree f (coefficients lowest first,
/// leading 1 omitted).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fqf {
    pub q: u64,
    pub m: Vec<u64>,
}

pub type FqElem = Vec<u64>;

impl Fqf {
    pub fn prime(q: u64) -> Self {
        Fqf { q, m: vec![0] }
    }

    pub fn new(q: u64, m: Vec<u64>) -> Self {
        Fqf { q, m }
    }

    pub fn degree(&self) -> usize {
        self.m.len()
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.q).pow(self.degree() as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> FqElem {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> FqElem {
        let mut v = self.zero();
        v[0] = c % self.q;
        v
    }

    /// The class of z (for degree one fields, the root -m0).
    pub fn gen(&self) -> FqElem {
        if self.degree() == 1 {
            return self.constant((self.q - self.m[0] % self.q) % self.q);
        }
        let mut v = self.zero();
        v[1] = 1;
        v
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| ((x as u128 + y as u128) % self.q as u128) as u64).collect()
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| (x + (self.q - y)) % self.q).collect()
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        a.iter().map(|&x| (self.q - x) % self.q).collect()
    }

    pub fn scale(&self, a: &FqElem, c: u64) -> FqElem {
        a.iter().map(|&x| mul_mod(x, c % self.q, self.q)).collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let f = self.degree();
        let q = self.q;
        let mut p = vec![0u64; 2 * f - 1];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                p[i + j] = (p[i + j] + mul_mod(a[i], b[j], q)) % q;
            }
        }
        for deg in (f..2 * f - 1).rev() {
            let t = p[deg];
            if t == 0 {
                continue;
            }
            p[deg] = 0;
            for (i, &mi) in self.m.iter().enumerate() {
                let s = mul_mod(t, mi, q);
                p[deg - f + i] = (p[deg - f + i] + q - s) % q;
            }
        }
        p.truncate(f);
        p
    }

    pub fn pow(&self, a: &FqElem, e: &BigUint) -> FqElem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &FqElem, e: u64) -> FqElem {
        self.pow(a, &BigUint::from(e))
    }

    pub fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if self.is_zero(a) {
            return None;
        }
        if self.degree() == 1 {
            return inv_mod(a[0], self.q).map(|x| vec![x]);
        }
        let e = self.order() - 2u32;
        Some(self.pow(a, &e))
    }

    /// Quadratic character: -1, 0 or 1.
    pub fn quadratic_char(&self, a: &FqElem) -> i32 {
        if self.is_zero(a) {
            return 0;
        }
        let e = (self.order() - 1u32) >> 1;
        let r = self.pow(a, &e);
        if r == self.one() {
            1
        } else {
            -1
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: &FqElem) -> Result<BigUint> {
        if self.is_zero(a) {
            return Err(Error::Internal("order of zero".into()));
        }
        let n = self.order() - 1u32;
        let fac = factor(&n, 1 << 24)?;
        let mut ord = n.clone();
        let one = self.one();
        for (p, e) in fac {
            for _ in 0..e {
                let cand = &ord / &p;
                if self.pow(a, &cand) == one {
                    ord = cand;
                } else {
                    break;
                }
            }
        }
        Ok(ord)
    }

    /// Evaluate a polynomial with F_q coefficients (lowest first) at a.
    pub fn eval_poly(&self, coeffs: &[u64], a: &FqElem) -> FqElem {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, a), &self.constant(c));
        }
        acc
    }
}

/// Roots in F_q of a polynomial with F_q coefficients, by exhaustive search.
pub fn roots_mod_p(coeffs: &[u64], q: u64) -> Result<Vec<u64>> {
    if q > 50_000_000 {
        return Err(Error::Budget {
            bound: q.into(),
            budget: 50_000_000,
        });
    }
    let mut out = vec![];
    for x in 0..q {
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = (mul_mod(acc, x, q) + c % q) % q;
        }
        if acc == 0 {
            out.push(x);
        }
    }
    Ok(out)
}
