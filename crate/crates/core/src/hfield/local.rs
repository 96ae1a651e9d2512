//! q-adic completions used to read valuations at odd primes of O_H.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ff::{FqElem, Fqf};
use crate::hfield::{HElem, KElem};

/// q-adic valuation of a nonzero integer.
pub fn vq(x: &BigInt, q: &BigInt) -> u64 {
    let mut v = 0;
    let mut x = x.clone();
    while (&x % q).is_zero() {
        x /= q;
        v += 1;
    }
    v
}

/// Smallest s with q^s·h having q-integral coordinates.
pub fn q_denominator_exponent(h: &HElem, q: u64) -> u64 {
    let qb = BigInt::from(q);
    h.coords()
        .iter()
        .map(|r| if r.is_zero() { 0 } else { vq(r.denom(), &qb) })
        .max()
        .unwrap_or(0)
}

fn rat_mod(r: &BigRational, pm: &BigInt) -> Result<BigInt> {
    let d = r.denom().mod_floor(pm);
    let inv = mod_inverse(&d, pm).ok_or_else(|| Error::Internal("denominator not invertible".into()))?;
    Ok((r.numer() * inv).mod_floor(pm))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Galois ring (Z/q^P)[z]/(m(z)), the completion of an unramified prime
/// truncated at precision P.
#[derive(Clone, Debug)]
pub struct GaloisRing {
    pub q: BigInt,
    pub prec: u32,
    pub pm: BigInt,
    pub m: Vec<BigInt>,
    pub residue: Fqf,
}

pub type GrElem = Vec<BigInt>;

impl GaloisRing {
    pub fn new(residue: &Fqf, prec: u32) -> Self {
        let q = BigInt::from(residue.q);
        let pm = q.pow(prec);
        GaloisRing {
            q,
            prec,
            pm,
            m: residue.m.iter().map(|&c| BigInt::from(c)).collect(),
            residue: residue.clone(),
        }
    }

    fn f(&self) -> usize {
        self.m.len()
    }

    pub fn constant(&self, c: BigInt) -> GrElem {
        let mut v = vec![BigInt::zero(); self.f()];
        v[0] = c.mod_floor(&self.pm);
        v
    }

    pub fn lift(&self, a: &FqElem) -> GrElem {
        a.iter().map(|&c| BigInt::from(c)).collect()
    }

    pub fn reduce(&self, a: &GrElem) -> FqElem {
        a.iter()
            .map(|c| c.mod_floor(&self.q).to_u64().unwrap())
            .collect()
    }

    pub fn add(&self, a: &GrElem, b: &GrElem) -> GrElem {
        a.iter().zip(b).map(|(x, y)| (x + y).mod_floor(&self.pm)).collect()
    }

    pub fn sub(&self, a: &GrElem, b: &GrElem) -> GrElem {
        a.iter().zip(b).map(|(x, y)| (x - y).mod_floor(&self.pm)).collect()
    }

    pub fn mul(&self, a: &GrElem, b: &GrElem) -> GrElem {
        let f = self.f();
        let mut p = vec![BigInt::zero(); 2 * f - 1];
        for i in 0..f {
            for j in 0..f {
                p[i + j] += &a[i] * &b[j];
            }
        }
        for deg in (f..2 * f - 1).rev() {
            let t = std::mem::take(&mut p[deg]);
            for (i, mi) in self.m.iter().enumerate() {
                p[deg - f + i] -= &t * mi;
            }
        }
        p.truncate(f);
        p.into_iter().map(|x| x.mod_floor(&self.pm)).collect()
    }

    pub fn inv(&self, a: &GrElem) -> Result<GrElem> {
        let r = self.residue.inv(&self.reduce(a)).ok_or_else(|| {
            Error::Internal("inverting a non-unit in a Galois ring".into())
        })?;
        let mut y = self.lift(&r);
        let two = self.constant(BigInt::from(2));
        let mut precision = 1u32;
        while precision < self.prec {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            precision *= 2;
        }
        Ok(y)
    }

    pub fn eval_int_poly(&self, coeffs: &[i64], x: &GrElem) -> GrElem {
        let mut acc = self.constant(BigInt::zero());
        for &c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.constant(BigInt::from(c)));
        }
        acc
    }

    /// Newton lift of a simple root of an integer polynomial.
    pub fn hensel_root(&self, coeffs: &[i64], approx: &FqElem) -> Result<GrElem> {
        let deriv: Vec<i64> = coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect();
        let mut x = self.lift(approx);
        let mut precision = 1u32;
        while precision < self.prec {
            let num = self.eval_int_poly(coeffs, &x);
            let den = self.eval_int_poly(&deriv, &x);
            x = self.sub(&x, &self.mul(&num, &self.inv(&den)?));
            precision *= 2;
        }
        Ok(x)
    }

    pub fn valuation(&self, a: &GrElem) -> Option<u64> {
        a.iter()
            .filter(|c| !c.is_zero())
            .map(|c| vq(c, &self.q))
            .min()
    }
}

/// Embedding of H into an unramified completion, truncated at precision P.
#[derive(Clone, Debug)]
pub struct UnramifiedEmbedding {
    pub ring: GaloisRing,
    pub sqrt_d: GrElem,
    pub xi: GrElem,
}

impl UnramifiedEmbedding {
    pub fn map_k(&self, k: &KElem) -> Result<GrElem> {
        let x = rat_mod(&k.x, &self.ring.pm)?;
        let y = rat_mod(&k.y, &self.ring.pm)?;
        Ok(self.ring.add(&self.ring.constant(x), &self.ring.mul(&self.ring.constant(y), &self.sqrt_d)))
    }

    /// Image of an element with q-integral coordinates.
    pub fn map(&self, h: &HElem) -> Result<GrElem> {
        let mut acc = self.map_k(&h.c[2])?;
        for i in (0..2).rev() {
            acc = self.ring.add(&self.ring.mul(&acc, &self.xi), &self.map_k(&h.c[i])?);
        }
        Ok(acc)
    }
}

/// Element a0 + a1·ϖ of Z_q[ϖ]/(ϖ² − D), truncated mod q^P, for q = |D|.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RamElem {
    pub a0: BigInt,
    pub a1: BigInt,
}

#[derive(Clone, Debug)]
pub struct RamifiedField {
    pub q: BigInt,
    pub d: BigInt,
    pub prec: u32,
    pub pm: BigInt,
}

impl RamifiedField {
    pub fn new(d: i64, prec: u32) -> Self {
        let q = BigInt::from(d.abs());
        RamifiedField {
            pm: q.pow(prec),
            q,
            d: BigInt::from(d),
            prec,
        }
    }

    pub fn elem(&self, a0: BigInt, a1: BigInt) -> RamElem {
        RamElem {
            a0: a0.mod_floor(&self.pm),
            a1: a1.mod_floor(&self.pm),
        }
    }

    pub fn add(&self, x: &RamElem, y: &RamElem) -> RamElem {
        self.elem(&x.a0 + &y.a0, &x.a1 + &y.a1)
    }

    pub fn sub(&self, x: &RamElem, y: &RamElem) -> RamElem {
        self.elem(&x.a0 - &y.a0, &x.a1 - &y.a1)
    }

    pub fn mul(&self, x: &RamElem, y: &RamElem) -> RamElem {
        self.elem(
            &x.a0 * &y.a0 + &self.d * &x.a1 * &y.a1,
            &x.a0 * &y.a1 + &x.a1 * &y.a0,
        )
    }

    /// Valuation in powers of ϖ; None for zero at this precision.
    pub fn valuation(&self, x: &RamElem) -> Option<u64> {
        let v0 = if x.a0.is_zero() { None } else { Some(2 * vq(&x.a0, &self.q)) };
        let v1 = if x.a1.is_zero() { None } else { Some(2 * vq(&x.a1, &self.q) + 1) };
        match (v0, v1) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// x / ϖ^n for x of valuation at least n (loses precision).
    fn shift_down(&self, x: &RamElem, n: u64) -> RamElem {
        let mut x = x.clone();
        for _ in 0..n {
            // (a0 + a1ϖ)/ϖ = a1 + (a0/D)ϖ
            let a0 = &x.a0 / &self.d;
            x = self.elem(x.a1.clone(), a0);
        }
        x
    }

    fn inv_unit(&self, x: &RamElem) -> Result<RamElem> {
        let n = (&x.a0 * &x.a0 - &self.d * &x.a1 * &x.a1).mod_floor(&self.pm);
        let ni = mod_inverse(&n, &self.pm).ok_or_else(|| Error::Internal("non-unit in K_v".into()))?;
        Ok(self.elem(&x.a0 * &ni, -&x.a1 * &ni))
    }

    pub fn eval_int_poly(&self, coeffs: &[i64], x: &RamElem) -> RamElem {
        let mut acc = self.elem(BigInt::zero(), BigInt::zero());
        for &c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.elem(BigInt::from(c), BigInt::zero()));
        }
        acc
    }

    /// All roots of a monic integer polynomial in the ring of integers of
    /// Q_q(√D), found by lifting residues mod ϖ² with Newton's method.
    pub fn roots(&self, coeffs: &[i64]) -> Result<Vec<RamElem>> {
        let deriv: Vec<i64> = coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect();
        let qq = self.q.to_u64().unwrap();
        let mut out: Vec<RamElem> = vec![];
        for a in 0..qq {
            for b in 0..qq {
                let mut x = self.elem(BigInt::from(a), BigInt::from(b));
                let gv = self.valuation(&self.eval_int_poly(coeffs, &x));
                let dv = self.valuation(&self.eval_int_poly(&deriv, &x));
                let (Some(dv), gv) = (dv, gv) else { continue };
                if let Some(gv) = gv {
                    if gv <= 2 * dv {
                        continue;
                    }
                }
                for _ in 0..12 {
                    let g = self.eval_int_poly(coeffs, &x);
                    if self.valuation(&g).is_none() {
                        break;
                    }
                    let dg = self.eval_int_poly(&deriv, &x);
                    let u = self.inv_unit(&self.shift_down(&dg, dv))?;
                    let step = self.mul(&self.shift_down(&g, dv), &u);
                    x = self.sub(&x, &step);
                }
                // canonical representative at reduced precision
                let keep = self.q.pow(self.prec / 2);
                let x = RamElem {
                    a0: x.a0.mod_floor(&keep),
                    a1: x.a1.mod_floor(&keep),
                };
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn map_k(&self, k: &KElem) -> Result<RamElem> {
        Ok(self.elem(rat_mod(&k.x, &self.pm)?, rat_mod(&k.y, &self.pm)?))
    }

    /// Image of an element with q-integral coordinates under ξ ↦ root.
    pub fn map(&self, h: &HElem, root: &RamElem) -> Result<RamElem> {
        let mut acc = self.map_k(&h.c[2])?;
        for i in (0..2).rev() {
            acc = self.add(&self.mul(&acc, root), &self.map_k(&h.c[i])?);
        }
        Ok(acc)
    }
}
