use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::qfield::{Case, QuadInt};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Element x + y√D of K with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KElem {
    pub x: BigRational,
    pub y: BigRational,
}

impl KElem {
    pub fn zero() -> Self {
        KElem {
            x: BigRational::zero(),
            y: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        KElem {
            x: rat(n),
            y: BigRational::zero(),
        }
    }

    pub fn from_big(n: BigInt) -> Self {
        KElem {
            x: BigRational::from_integer(n),
            y: BigRational::zero(),
        }
    }

    pub fn sqrt_d() -> Self {
        KElem {
            x: BigRational::zero(),
            y: rat(1),
        }
    }

    pub fn from_quad(q: &QuadInt) -> Self {
        let two = BigInt::from(2);
        KElem {
            x: BigRational::new(q.a.clone(), two.clone()),
            y: BigRational::new(q.b.clone(), two),
        }
    }

    /// Back to the half-integer representation, if integral.
    pub fn to_quad(&self, d: i64) -> Option<QuadInt> {
        let a = &self.x * rat(2);
        let b = &self.y * rat(2);
        if !a.is_integer() || !b.is_integer() {
            return None;
        }
        QuadInt::new(a.to_integer(), b.to_integer(), d).ok()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, o: &KElem) -> KElem {
        KElem {
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }

    pub fn sub(&self, o: &KElem) -> KElem {
        KElem {
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }

    pub fn neg(&self) -> KElem {
        KElem {
            x: -&self.x,
            y: -&self.y,
        }
    }

    pub fn mul(&self, o: &KElem, d: i64) -> KElem {
        KElem {
            x: &self.x * &o.x + &self.y * &o.y * rat(d),
            y: &self.x * &o.y + &self.y * &o.x,
        }
    }

    pub fn scale(&self, r: &BigRational) -> KElem {
        KElem {
            x: &self.x * r,
            y: &self.y * r,
        }
    }

    pub fn conj(&self) -> KElem {
        KElem {
            x: self.x.clone(),
            y: -&self.y,
        }
    }

    pub fn norm(&self, d: i64) -> BigRational {
        &self.x * &self.x - &self.y * &self.y * rat(d)
    }

    pub fn inv(&self, d: i64) -> Option<KElem> {
        let n = self.norm(d);
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scale(&n.recip()))
    }

    /// Least common denominator of both coordinates.
    pub fn denom(&self) -> BigInt {
        self.x.denom().lcm(self.y.denom())
    }
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·√D", self.x, self.y)
    }
}

/// The field H = K(ξ), ξ³ + c1·ξ + c0 = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HField {
    pub d: i64,
    pub c1: i64,
    pub c0: i64,
}

impl HField {
    pub fn of(case: &Case) -> Self {
        HField {
            d: case.d,
            c1: case.c1,
            c0: case.c0,
        }
    }
}

/// Element e0 + e1·ξ + e2·ξ² of H.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HElem {
    pub field: HField,
    pub c: [KElem; 3],
}

impl HElem {
    pub fn new(field: HField, c: [KElem; 3]) -> Self {
        HElem { field, c }
    }

    pub fn zero(field: HField) -> Self {
        HElem::new(field, [KElem::zero(), KElem::zero(), KElem::zero()])
    }

    pub fn one(field: HField) -> Self {
        Self::from_k(field, KElem::one())
    }

    pub fn from_int(field: HField, n: i64) -> Self {
        Self::from_k(field, KElem::from_int(n))
    }

    pub fn from_big(field: HField, n: BigInt) -> Self {
        Self::from_k(field, KElem::from_big(n))
    }

    pub fn from_k(field: HField, k: KElem) -> Self {
        HElem::new(field, [k, KElem::zero(), KElem::zero()])
    }

    pub fn from_quad(field: HField, q: &QuadInt) -> Self {
        Self::from_k(field, KElem::from_quad(q))
    }

    pub fn xi(field: HField) -> Self {
        HElem::new(field, [KElem::zero(), KElem::one(), KElem::zero()])
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(KElem::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == KElem::one() && self.c[1].is_zero() && self.c[2].is_zero()
    }

    /// The element lies in K.
    pub fn in_k(&self) -> Option<&KElem> {
        if self.c[1].is_zero() && self.c[2].is_zero() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    pub fn scale_k(&self, k: &KElem) -> HElem {
        let d = self.field.d;
        HElem::new(
            self.field,
            [self.c[0].mul(k, d), self.c[1].mul(k, d), self.c[2].mul(k, d)],
        )
    }

    pub fn scale_int(&self, n: i64) -> HElem {
        let r = rat(n);
        HElem::new(
            self.field,
            [self.c[0].scale(&r), self.c[1].scale(&r), self.c[2].scale(&r)],
        )
    }

    pub fn scale_rat(&self, r: &BigRational) -> HElem {
        HElem::new(
            self.field,
            [self.c[0].scale(r), self.c[1].scale(r), self.c[2].scale(r)],
        )
    }

    pub fn square(&self) -> HElem {
        self * self
    }

    pub fn pow(&self, mut n: u64) -> HElem {
        let mut base = self.clone();
        let mut acc = HElem::one(self.field);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Matrix of multiplication by self on the basis {1, ξ, ξ²}; column j
    /// holds the coordinates of self·ξ^j.
    pub fn mult_matrix(&self) -> [[KElem; 3]; 3] {
        let xi = HElem::xi(self.field);
        let c0 = self.clone();
        let c1 = &c0 * &xi;
        let c2 = &c1 * &xi;
        let cols = [c0, c1, c2];
        std::array::from_fn(|i| std::array::from_fn(|j| cols[j].c[i].clone()))
    }

    /// N_{H/K}(self).
    pub fn norm_hk(&self) -> KElem {
        let m = self.mult_matrix();
        det3(&m, self.field.d)
    }

    /// N_{H/Q}(self).
    pub fn norm_hq(&self) -> BigRational {
        self.norm_hk().norm(self.field.d)
    }

    pub fn trace_hk(&self) -> KElem {
        let m = self.mult_matrix();
        m[0][0].add(&m[1][1]).add(&m[2][2])
    }

    pub fn inv(&self) -> Result<HElem> {
        if self.is_zero() {
            return Err(Error::Internal("inverse of zero in H".into()));
        }
        let m = self.mult_matrix();
        let sol = solve3(&m, &[KElem::one(), KElem::zero(), KElem::zero()], self.field.d)
            .ok_or_else(|| Error::Internal("singular multiplication matrix".into()))?;
        Ok(HElem::new(self.field, sol))
    }

    pub fn div(&self, o: &HElem) -> Result<HElem> {
        Ok(self * &o.inv()?)
    }

    /// Evaluate self as a polynomial in ξ at another element.
    pub fn substitute_xi(&self, image: &HElem) -> HElem {
        let mut acc = HElem::from_k(self.field, self.c[2].clone());
        for i in (0..2).rev() {
            acc = &(&acc * image) + &HElem::from_k(self.field, self.c[i].clone());
        }
        acc
    }

    /// Apply the nontrivial automorphism of K coefficientwise; this is the
    /// automorphism of H fixing ξ.
    pub fn conj_k(&self) -> HElem {
        HElem::new(
            self.field,
            [self.c[0].conj(), self.c[1].conj(), self.c[2].conj()],
        )
    }

    /// Least common denominator of all six rational coordinates.
    pub fn denom(&self) -> BigInt {
        self.c
            .iter()
            .fold(BigInt::one(), |acc, k| acc.lcm(&k.denom()))
    }

    /// The six rational coordinates (x0, y0, x1, y1, x2, y2).
    pub fn coords(&self) -> [BigRational; 6] {
        [
            self.c[0].x.clone(),
            self.c[0].y.clone(),
            self.c[1].x.clone(),
            self.c[1].y.clone(),
            self.c[2].x.clone(),
            self.c[2].y.clone(),
        ]
    }

    pub fn from_coords(field: HField, v: [BigRational; 6]) -> Self {
        let [a, b, c, d, e, f] = v;
        HElem::new(
            field,
            [KElem { x: a, y: b }, KElem { x: c, y: d }, KElem { x: e, y: f }],
        )
    }

    /// Largest absolute numerator, as a size measure.
    pub fn height_bits(&self) -> u64 {
        self.coords()
            .iter()
            .map(|r| r.numer().abs().bits().max(r.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn det3(m: &[[KElem; 3]; 3], d: i64) -> KElem {
    let t = |a: &KElem, b: &KElem, c: &KElem| a.mul(b, d).mul(c, d);
    let p = t(&m[0][0], &m[1][1], &m[2][2])
        .add(&t(&m[0][1], &m[1][2], &m[2][0]))
        .add(&t(&m[0][2], &m[1][0], &m[2][1]));
    let n = t(&m[0][2], &m[1][1], &m[2][0])
        .add(&t(&m[0][0], &m[1][2], &m[2][1]))
        .add(&t(&m[0][1], &m[1][0], &m[2][2]));
    p.sub(&n)
}

/// Solve m·v = rhs over K by Gaussian elimination.
pub(crate) fn solve3(m: &[[KElem; 3]; 3], rhs: &[KElem; 3], d: i64) -> Option<[KElem; 3]> {
    let mut a: Vec<Vec<KElem>> = (0..3)
        .map(|i| {
            let mut row = m[i].to_vec();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for col in 0..3 {
        let piv = (col..3).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].inv(d)?;
        for j in col..4 {
            a[col][j] = a[col][j].mul(&inv, d);
        }
        for r in 0..3 {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..4 {
                    let s = f.mul(&a[col][j], d);
                    a[r][j] = a[r][j].sub(&s);
                }
            }
        }
    }
    Some([a[0][3].clone(), a[1][3].clone(), a[2][3].clone()])
}

impl<'a> Add<&'a HElem> for &'a HElem {
    type Output = HElem;
    fn add(self, o: &HElem) -> HElem {
        debug_assert_eq!(self.field, o.field);
        HElem::new(
            self.field,
            [
                self.c[0].add(&o.c[0]),
                self.c[1].add(&o.c[1]),
                self.c[2].add(&o.c[2]),
            ],
        )
    }
}

impl<'a> Sub<&'a HElem> for &'a HElem {
    type Output = HElem;
    fn sub(self, o: &HElem) -> HElem {
        debug_assert_eq!(self.field, o.field);
        HElem::new(
            self.field,
            [
                self.c[0].sub(&o.c[0]),
                self.c[1].sub(&o.c[1]),
                self.c[2].sub(&o.c[2]),
            ],
        )
    }
}

impl Neg for &HElem {
    type Output = HElem;
    fn neg(self) -> HElem {
        HElem::new(self.field, [self.c[0].neg(), self.c[1].neg(), self.c[2].neg()])
    }
}

impl<'a> Mul<&'a HElem> for &'a HElem {
    type Output = HElem;
    fn mul(self, o: &HElem) -> HElem {
        debug_assert_eq!(self.field, o.field);
        let f = self.field;
        let d = f.d;
        let mut p: [KElem; 5] = std::array::from_fn(|_| KElem::zero());
        for i in 0..3 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                if o.c[j].is_zero() {
                    continue;
                }
                p[i + j] = p[i + j].add(&self.c[i].mul(&o.c[j], d));
            }
        }
        // ξ³ = -c1·ξ - c0, ξ⁴ = -c1·ξ² - c0·ξ
        let c1 = rat(f.c1);
        let c0 = rat(f.c0);
        for deg in [4usize, 3] {
            let t = std::mem::replace(&mut p[deg], KElem::zero());
            if t.is_zero() {
                continue;
            }
            p[deg - 2] = p[deg - 2].sub(&t.scale(&c1));
            p[deg - 3] = p[deg - 3].sub(&t.scale(&c0));
        }
        let [a, b, c, _, _] = p;
        HElem::new(f, [a, b, c])
    }
}

impl fmt::Display for HElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] + [{}]·ξ + [{}]·ξ²",
            self.c[0], self.c[1], self.c[2]
        )
    }
}

/// Evaluate a polynomial with H coefficients (lowest degree first).
pub fn poly_eval(coeffs: &[HElem], x: &HElem) -> HElem {
    let mut acc = HElem::zero(x.field);
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// 1 − α^k·ξ.
pub fn p_k_elem(case: &Case, k: u64) -> HElem {
    let field = HField::of(case);
    let ak = HElem::from_quad(field, &case.alpha.pow(k));
    &HElem::one(field) - &(&ak * &HElem::xi(field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relation() {
        for id in [1, 2] {
            let case = Case::shipped(id).unwrap();
            let f = HField::of(&case);
            let xi = HElem::xi(f);
            let lhs = &xi * &xi.square();
            let rhs = &xi.scale_int(-case.c1) - &HElem::from_int(f, case.c0);
            assert_eq!(lhs, rhs);
            assert_eq!(xi.norm_hk(), KElem::from_int(-case.c0));
        }
    }

    #[test]
    fn relative_norm_of_p_k() {
        for id in [1, 2] {
            let case = Case::shipped(id).unwrap();
            for k in 1..=12 {
                let n = p_k_elem(&case, k).norm_hk();
                assert_eq!(n.to_quad(case.d).unwrap(), case.pi_k(k), "k={k}");
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let case = Case::shipped(1).unwrap();
        let x = p_k_elem(&case, 3);
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
    }
}
