//! Arithmetic in the maximal order of K = Q(√D) and the sequence quantities
//! π_k, F_k, C_k and ε_k.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::split_two;
use crate::error::{Error, Result};

/// Element (a + b√D)/2 of the maximal order, with a ≡ b (mod 2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
    pub d: i64,
}

impl QuadInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, d: i64) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if a.is_odd() != b.is_odd() {
            return Err(Error::Parameter(format!(
                "({a} + {b}√{d})/2 is not integral"
            )));
        }
        Ok(QuadInt { a, b, d })
    }

    /// The rational integer n.
    pub fn from_int(n: impl Into<BigInt>, d: i64) -> Self {
        QuadInt {
            a: n.into() * 2,
            b: BigInt::zero(),
            d,
        }
    }

    pub fn one(d: i64) -> Self {
        Self::from_int(1, d)
    }

    pub fn sqrt_d(d: i64) -> Self {
        QuadInt {
            a: BigInt::zero(),
            b: BigInt::from(2),
            d,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn norm(&self) -> BigInt {
        (&self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b) / 4
    }

    pub fn trace(&self) -> BigInt {
        self.a.clone()
    }

    pub fn conj(&self) -> Self {
        QuadInt {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Coordinates (x, y) in the basis {1, τ}, τ = (1 + √D)/2.
    pub fn tau_coords(&self) -> (BigInt, BigInt) {
        ((&self.a - &self.b) / 2, self.b.clone())
    }

    pub fn try_mul(&self, o: &QuadInt) -> Result<QuadInt> {
        check_d(self.d, o.d)?;
        Ok(self.mul_unchecked(o))
    }

    fn mul_unchecked(&self, o: &QuadInt) -> QuadInt {
        let d = BigInt::from(self.d);
        let a = &self.a * &o.a + d * &self.b * &o.b;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadInt {
            a: a / 2,
            b: b / 2,
            d: self.d,
        }
    }

    pub fn pow(&self, mut n: u64) -> QuadInt {
        let mut base = self.clone();
        let mut acc = QuadInt::one(self.d);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }
}

fn check_d(d1: i64, d2: i64) -> Result<()> {
    if d1 != d2 {
        return Err(Error::Parameter(format!("mismatched fields D={d1}, D={d2}")));
    }
    Ok(())
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}√{})/2", self.a, self.b, self.d)
    }
}

impl<'a> Mul<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn mul(self, o: &QuadInt) -> QuadInt {
        assert_eq!(self.d, o.d, "mismatched fields");
        self.mul_unchecked(o)
    }
}

impl<'a> Add<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn add(self, o: &QuadInt) -> QuadInt {
        assert_eq!(self.d, o.d, "mismatched fields");
        QuadInt {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d: self.d,
        }
    }
}

impl<'a> Sub<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn sub(self, o: &QuadInt) -> QuadInt {
        assert_eq!(self.d, o.d, "mismatched fields");
        QuadInt {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d: self.d,
        }
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }
}

/// One of the two primes of K above 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoPrime {
    /// The prime dividing α.
    Lambda,
    LambdaBar,
}

/// The defining data of one sequence: K, the cubic x³ + c1·x + c0 and α.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub id: u8,
    pub d: i64,
    pub c1: i64,
    pub c0: i64,
    pub alpha: QuadInt,
    /// Auxiliary split prime used to fix the sign of γ₃.
    pub aux_prime: u64,
}

impl Case {
    pub fn shipped(id: u8) -> Result<Case> {
        let case = match id {
            1 => Case {
                id,
                d: -23,
                c1: -1,
                c0: -1,
                alpha: QuadInt::new(3, 1, -23)?,
                aux_prime: 59,
            },
            2 => Case {
                id,
                d: -31,
                c1: 1,
                c0: 1,
                alpha: QuadInt::new(1, 1, -31)?,
                aux_prime: 47,
            },
            _ => return Err(Error::Parameter(format!("unknown case {id}"))),
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.d != self.d {
            return Err(Error::Parameter("α lies in a different field".into()));
        }
        if self.alpha.norm() != BigInt::from(8) {
            return Err(Error::Parameter(format!("N(α) = {} ≠ 8", self.alpha.norm())));
        }
        if self.d.rem_euclid(8) != 1 {
            return Err(Error::Parameter("2 must split in K".into()));
        }
        let t = self.alpha.trace();
        let one = BigInt::one();
        let eight = BigInt::from(8);
        let v1 = (1 + self.c1 + self.c0).mod_floor(&8);
        let v2 = (&one + self.c1 + self.c0 * &t).mod_floor(&eight);
        if v1 == 1 || v2 == one {
            return Err(Error::Parameter(
                "π_k ≡ 1 modulo the cube of the conjugate prime above 2".into(),
            ));
        }
        Ok(())
    }

    pub fn c1_q(&self) -> QuadInt {
        QuadInt::from_int(self.c1, self.d)
    }

    pub fn c0_q(&self) -> QuadInt {
        QuadInt::from_int(self.c0, self.d)
    }

    /// π_k = 1 + c1·α^{2k} + c0·α^{3k}.
    pub fn pi_k(&self, k: u64) -> QuadInt {
        let ak = self.alpha.pow(k);
        let a2 = &ak * &ak;
        let a3 = &a2 * &ak;
        let one = QuadInt::one(self.d);
        let t = &(&self.c1_q() * &a2) + &(&self.c0_q() * &a3);
        &one + &t
    }

    /// F_k = N(π_k).
    pub fn f_k(&self, k: u64) -> BigInt {
        self.pi_k(k).norm()
    }

    /// (N(c1 + c0·α^k), odd part, 2-adic valuation).
    pub fn cofactor(&self, k: u64) -> Result<(BigInt, BigInt, u64)> {
        let x = &self.c1_q() + &(&self.c0_q() * &self.alpha.pow(k));
        let n = x.norm();
        if n.is_zero() {
            return Err(Error::Precondition(format!("N(c1 + c0·α^{k}) = 0")));
        }
        let (e2, c) = split_two(&n);
        if e2 >= 6 * k {
            return Err(Error::Precondition(format!(
                "2^{e2} divides N(c1 + c0·α^{k}), need exponent < {}",
                6 * k
            )));
        }
        Ok((n, c, e2))
    }

    /// F_k > 16·N(c1 + c0·α^k)².
    pub fn norm_gate(&self, k: u64) -> bool {
        let x = &self.c1_q() + &(&self.c0_q() * &self.alpha.pow(k));
        let n = x.norm();
        self.f_k(k) > BigInt::from(16) * &n * &n
    }

    /// ε(π) for an element π coprime to 2.
    pub fn epsilon(&self, pi: &QuadInt) -> i32 {
        let nn = BigInt::from((1 - self.d) / 4);
        let four = BigInt::from(4);
        let (x, y) = pi.tau_coords();
        let red = |v: &BigInt| v.mod_floor(&four);
        let mul = |p: &(BigInt, BigInt), q: &(BigInt, BigInt)| {
            let x = &p.0 * &q.0 - &nn * &p.1 * &q.1;
            let y = &p.0 * &q.1 + &p.1 * &q.0 + &p.1 * &q.1;
            (red(&x), red(&y))
        };
        let p = (red(&x), red(&y));
        let c = mul(&mul(&p, &p), &p);
        // 1 = (1, 0) and -√D = 1 - 2τ ≡ (1, 2) in the τ basis.
        let one = BigInt::one();
        if c.0 == one && (c.1.is_zero() || c.1 == BigInt::from(2)) {
            1
        } else {
            -1
        }
    }

    pub fn epsilon_k(&self, k: u64) -> i32 {
        self.epsilon(&self.pi_k(k))
    }

    /// A square root of D in Z_2 modulo 2^prec, on the branch of `prime`.
    pub fn two_adic_sqrt_d(&self, prime: TwoPrime, prec: u32) -> BigInt {
        let d = BigInt::from(self.d);
        let mut s = BigInt::one();
        for n in 3..=prec + 1 {
            let m = BigInt::one() << (n + 1);
            if (&s * &s - &d).mod_floor(&m) != BigInt::zero() {
                s += BigInt::one() << (n - 1);
            }
        }
        let modulus = BigInt::one() << prec;
        s = s.mod_floor(&modulus);
        let img = |s: &BigInt| -> BigInt { (&self.alpha.a + &self.alpha.b * s) / 2 };
        let on_lambda = img(&s).is_even();
        let want_lambda = prime == TwoPrime::Lambda;
        if on_lambda != want_lambda {
            s = (-s).mod_floor(&modulus);
        }
        s
    }

    /// Image of an O_K element in Z/2^prec under the embedding for `prime`.
    pub fn two_adic_image(&self, x: &QuadInt, prime: TwoPrime, prec: u32) -> BigInt {
        let s = self.two_adic_sqrt_d(prime, prec + 1);
        let m = BigInt::one() << prec;
        (((&x.a + &x.b * &s) / 2) as BigInt).mod_floor(&m)
    }
}

/// |x| for display of signed values.
pub fn abs(x: &BigInt) -> BigInt {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, d: i64) -> QuadInt {
        QuadInt::new(a, b, d).unwrap()
    }

    #[test]
    fn products_of_alpha() {
        let a = q(3, 1, -23);
        let a2 = &a * &a;
        assert_eq!(a2, q(-7, 3, -23));
        let a3 = &a2 * &a;
        assert_eq!(a3, q(-45, 1, -23));
        assert_eq!(a3.norm(), BigInt::from(512));
        let b = q(1, 1, -31);
        assert_eq!(b.pow(2), q(-15, 1, -31));
        assert_eq!(b.pow(3), q(-23, -7, -31));
        assert_eq!(b.pow(0), QuadInt::one(-31));
    }

    #[test]
    fn mismatched_fields_rejected() {
        assert!(q(1, 1, -23).try_mul(&q(1, 1, -31)).is_err());
        assert!(QuadInt::new(1, 2, -23).is_err());
    }

    #[test]
    fn first_terms() {
        let c1 = Case::shipped(1).unwrap();
        let c2 = Case::shipped(2).unwrap();
        assert_eq!(c1.pi_k(1), q(54, -4, -23));
        assert_eq!(c1.f_k(1), BigInt::from(821));
        assert_eq!(c2.pi_k(1), q(-36, -6, -31));
        assert_eq!(c2.f_k(1), BigInt::from(603));
        let (n, c, e) = c1.cofactor(1).unwrap();
        assert_eq!((n, c, e), (BigInt::from(12), BigInt::from(3), 2));
    }

    #[test]
    fn epsilon_values() {
        let c1 = Case::shipped(1).unwrap();
        assert_eq!(c1.epsilon(&QuadInt::one(-23)), 1);
        assert_eq!(c1.epsilon(&QuadInt::from_int(-1, -23)), -1);
        // π_1 = 27 - 2√D ≡ 3 + 2√D ≡ 1 in O_K/4, because 2 + 2√D = 4τ.
        assert_eq!(c1.epsilon_k(1), 1);
        assert_eq!(c1.epsilon(&q(12, 2, -23)), 1);
        assert_eq!(c1.epsilon(&q(12, -2, -23)), -1);
        for k in 1..20 {
            assert_eq!(c1.epsilon_k(k), c1.epsilon_k(k + 2));
        }
    }

    #[test]
    fn two_adic_branches() {
        for id in [1, 2] {
            let c = Case::shipped(id).unwrap();
            let a_l = c.two_adic_image(&c.alpha, TwoPrime::Lambda, 20);
            assert_eq!(a_l.trailing_zeros(), Some(3));
            let a_lb = c.two_adic_image(&c.alpha, TwoPrime::LambdaBar, 20);
            assert!(a_lb.is_odd());
            assert_eq!(
                a_lb.mod_floor(&BigInt::from(8)),
                c.alpha.trace().mod_floor(&BigInt::from(8))
            );
        }
    }
}
