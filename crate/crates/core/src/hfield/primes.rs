use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::local::{q_denominator_exponent, GaloisRing, RamElem, RamifiedField, UnramifiedEmbedding};
use super::{HElem, HField};
use crate::arith::{factor, inv_mod, legendre, mod_u64, mul_mod, sqrt_mod_prime};
use crate::error::{Error, Result};
use crate::ff::{roots_mod_p, FqElem, Fqf};

const LOCAL_PREC: u32 = 12;
const RAMIFIED_PREC: u32 = 48;

/// How the rational prime q behaves in K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KLevel {
    /// q = (q, √D − r)(q, √D + r); this prime has √D ↦ r.
    Split { r: u64 },
    Inert,
    /// q = |D|; the prime of K is (√D).
    Ramified,
}

/// A prime of O_H above an odd rational prime q.
#[derive(Clone, Debug)]
pub struct PrimeIdealH {
    pub q: u64,
    pub k_level: KLevel,
    pub f_res: u32,
    pub residue: Fqf,
    pub sqrt_d: FqElem,
    pub xi: FqElem,
    pub n_l: BigUint,
    /// Root of the cubic in Q_q(√D) selecting this prime when q = |D|.
    pub ramified_root: Option<RamElem>,
}

impl PartialEq for PrimeIdealH {
    fn eq(&self, o: &Self) -> bool {
        self.q == o.q
            && self.residue == o.residue
            && self.sqrt_d == o.sqrt_d
            && self.xi == o.xi
            && self.ramified_root == o.ramified_root
    }
}

impl PrimeIdealH {
    fn new(q: u64, k_level: KLevel, residue: Fqf, sqrt_d: FqElem, xi: FqElem) -> Self {
        let f = residue.degree() as u32;
        let n_l = BigUint::from(q).pow(f) - 1u32;
        PrimeIdealH {
            q,
            k_level,
            f_res: f,
            residue,
            sqrt_d,
            xi,
            n_l,
            ramified_root: None,
        }
    }

    fn cubic(field: HField) -> [i64; 4] {
        [field.c0, field.c1, 0, 1]
    }

    /// ord_l(h) for nonzero h.
    pub fn ord(&self, h: &HElem) -> Result<i64> {
        if h.is_zero() {
            return Err(Error::Precondition("valuation of zero".into()));
        }
        let s = q_denominator_exponent(h, self.q);
        let scaled = h.scale_rat(&num_rational::BigRational::from_integer(BigInt::from(self.q).pow(s as u32)));
        if let Some(root) = &self.ramified_root {
            let kv = RamifiedField::new(h.field.d, RAMIFIED_PREC);
            let img = kv.map(&scaled, root)?;
            let v = kv
                .valuation(&img)
                .filter(|&v| v < RAMIFIED_PREC as u64)
                .ok_or_else(|| Error::Precision("valuation beyond local precision".into()))?;
            return Ok(v as i64 - 2 * s as i64);
        }
        let mut prec = LOCAL_PREC;
        loop {
            let emb = self.embedding(h.field, prec)?;
            let img = emb.map(&scaled)?;
            if let Some(v) = emb.ring.valuation(&img) {
                if v < prec as u64 {
                    return Ok(v as i64 - s as i64);
                }
            }
            if prec > 1024 {
                return Err(Error::Precision("valuation beyond local precision".into()));
            }
            prec *= 2;
        }
    }

    fn embedding(&self, field: HField, prec: u32) -> Result<UnramifiedEmbedding> {
        let ring = GaloisRing::new(&self.residue, prec);
        let d = field.d;
        let sqrt_d = match self.k_level {
            KLevel::Inert => ring.hensel_root(&[-d, 0, 1], &self.sqrt_d)?,
            _ => {
                // lift r in Z/q^P; residue element is a constant
                let sub = GaloisRing::new(&Fqf::prime(self.q), prec);
                let r = sub.hensel_root(&[-d, 0, 1], &vec![self.sqrt_d[0]])?;
                ring.constant(r[0].clone())
            }
        };
        let cubic = Self::cubic(field);
        let xi = ring.hensel_root(&cubic, &self.xi)?;
        Ok(UnramifiedEmbedding { ring, sqrt_d, xi })
    }

    /// Image in the residue field of an element with q-integral coordinates.
    pub fn reduce(&self, h: &HElem) -> Result<FqElem> {
        let f = &self.residue;
        let mut acc = self.reduce_k(&h.c[2])?;
        for i in (0..2).rev() {
            acc = f.add(&f.mul(&acc, &self.xi), &self.reduce_k(&h.c[i])?);
        }
        Ok(acc)
    }

    fn reduce_k(&self, k: &super::KElem) -> Result<FqElem> {
        let f = &self.residue;
        let red = |r: &num_rational::BigRational| -> Result<u64> {
            let n = mod_u64(r.numer(), self.q);
            let d = mod_u64(r.denom(), self.q);
            let di = inv_mod(d, self.q).ok_or_else(|| {
                Error::Precondition(format!("coordinate not integral at {}", self.q))
            })?;
            Ok(mul_mod(n, di, self.q))
        };
        let x = f.constant(red(&k.x)?);
        let y = f.constant(red(&k.y)?);
        Ok(f.add(&x, &f.mul(&y, &self.sqrt_d)))
    }

    /// (x / l) for x with q-integral coordinates.
    pub fn residue_symbol(&self, x: &HElem) -> Result<i32> {
        Ok(self.residue.quadratic_char(&self.reduce(x)?))
    }
}

/// All primes of O_H above the odd prime q.
pub fn primes_over(field: HField, q: u64) -> Result<Vec<PrimeIdealH>> {
    if q % 2 == 0 {
        return Err(Error::Precondition("primes above 2 are handled 2-adically".into()));
    }
    let d = field.d;
    let cubic: Vec<u64> = [field.c0, field.c1, 0, 1]
        .iter()
        .map(|&c| mod_u64(&BigInt::from(c), q))
        .collect();
    let dq = mod_u64(&BigInt::from(d), q);
    let mut out = vec![];
    if dq == 0 {
        if q as i64 != -d {
            return Err(Error::Internal("D is not prime".into()));
        }
        let kv = RamifiedField::new(d, RAMIFIED_PREC);
        let roots = kv.roots(&[field.c0, field.c1, 0, 1])?;
        if roots.len() != 3 {
            return Err(Error::Internal(format!(
                "expected three local roots above {q}, found {}",
                roots.len()
            )));
        }
        for r in roots {
            let xi = mod_u64(&r.a0, q);
            let mut l = PrimeIdealH::new(q, KLevel::Ramified, Fqf::prime(q), vec![0], vec![xi]);
            l.ramified_root = Some(r);
            out.push(l);
        }
        return Ok(out);
    }
    let roots = roots_mod_p(&cubic, q)?;
    if legendre(dq, q) == 1 {
        let r = sqrt_mod_prime(dq, q).unwrap();
        let mut rs = vec![r, q - r];
        rs.sort();
        for r in rs {
            match roots.len() {
                3 => {
                    for &x in &roots {
                        out.push(PrimeIdealH::new(q, KLevel::Split { r }, Fqf::prime(q), vec![r], vec![x]));
                    }
                }
                0 => {
                    let fld = Fqf::new(q, cubic[..3].to_vec());
                    let xi = fld.gen();
                    let sd = fld.constant(r);
                    out.push(PrimeIdealH::new(q, KLevel::Split { r }, fld, sd, xi));
                }
                n => {
                    return Err(Error::Internal(format!(
                        "cubic has {n} roots modulo split prime {q}"
                    )))
                }
            }
        }
    } else {
        if roots.len() != 1 {
            return Err(Error::Internal(format!(
                "cubic has {} roots modulo inert prime {q}",
                roots.len()
            )));
        }
        let fld = Fqf::new(q, vec![(q - dq) % q, 0]);
        let y = fld.gen();
        let r0 = roots[0];
        // remaining roots: (-r0 ± √δ)/2, δ = -3r0² - 4c1, √δ = t·√D
        let c1 = mod_u64(&BigInt::from(field.c1), q);
        let delta = (q - mul_mod(3, mul_mod(r0, r0, q), q) + q - mul_mod(4, c1, q)) % q;
        let ratio = mul_mod(delta, inv_mod(dq, q).unwrap(), q);
        let t = sqrt_mod_prime(ratio, q)
            .ok_or_else(|| Error::Internal("quadratic factor splits over F_q".into()))?;
        let inv2 = inv_mod(2, q).unwrap();
        let half_neg_r0 = fld.constant(mul_mod(q - r0 % q, inv2, q));
        let ty = fld.scale(&y, mul_mod(t, inv2, q));
        let mut xis = vec![fld.constant(r0), fld.add(&half_neg_r0, &ty), fld.sub(&half_neg_r0, &ty)];
        xis.sort();
        for xi in xis {
            debug_assert!(fld.is_zero(&fld.eval_poly(&cubic, &xi)));
            out.push(PrimeIdealH::new(q, KLevel::Inert, fld.clone(), y.clone(), xi));
        }
    }
    Ok(out)
}

/// A prime dividing a target element, with its valuation.
#[derive(Clone, Debug)]
pub struct PrimeFactor {
    pub prime: PrimeIdealH,
    pub ord: i64,
}

impl PrimeFactor {
    pub fn odd(&self) -> bool {
        self.ord.is_odd()
    }
}

/// Odd primes l of O_H with ord_l(a) ≠ 0, with the degree formula checked
/// against the factored absolute norm.
pub fn primes_above(a: &HElem, budget: u64) -> Result<Vec<PrimeFactor>> {
    if a.is_zero() {
        return Err(Error::Precondition("primes above zero".into()));
    }
    let n = a.norm_hq();
    let mut qs: Vec<(u64, i64)> = vec![];
    for (part, sign) in [(n.numer().abs(), 1i64), (n.denom().abs(), -1)] {
        if part.is_one() {
            continue;
        }
        let fac = factor(&part.to_biguint().unwrap(), budget)?;
        for (p, e) in fac {
            if p == BigUint::from(2u32) {
                continue;
            }
            let p = p.to_u64().ok_or_else(|| Error::Budget {
                bound: BigInt::from(p.clone()),
                budget: u64::MAX,
            })?;
            qs.push((p, sign * e as i64));
        }
    }
    qs.sort();
    let mut out = vec![];
    for (q, vn) in qs {
        let mut total = 0i64;
        for l in primes_over(a.field, q)? {
            let o = l.ord(a)?;
            total += l.f_res as i64 * o;
            if o != 0 {
                out.push(PrimeFactor { prime: l, ord: o });
            }
        }
        if total != vn {
            return Err(Error::Internal(format!(
                "degree formula fails at {q}: Σ f·ord = {total}, ord of norm = {vn}"
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfield::p_k_elem;
    use crate::qfield::Case;

    #[test]
    fn decomposition_shapes() {
        let case = Case::shipped(1).unwrap();
        let f = HField::of(&case);
        // 59 splits completely, 23 is ramified, 5 is inert in K
        assert_eq!(primes_over(f, 59).unwrap().len(), 6);
        assert!(primes_over(f, 59).unwrap().iter().all(|l| l.f_res == 1));
        assert_eq!(primes_over(f, 23).unwrap().len(), 3);
        let p5 = primes_over(f, 5).unwrap();
        assert_eq!(p5.len(), 3);
        assert!(p5.iter().all(|l| l.f_res == 2));
        // 3 splits in K but x³ - x - 1 is irreducible mod 3
        let p3 = primes_over(f, 3).unwrap();
        assert_eq!(p3.len(), 2);
        assert!(p3.iter().all(|l| l.f_res == 3));
    }

    #[test]
    fn p_k_primes_have_degree_one() {
        let case = Case::shipped(1).unwrap();
        let pk = p_k_elem(&case, 1);
        let fs = primes_above(&pk, 1 << 20).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].prime.q, 821);
        assert_eq!(fs[0].ord, 1);
        assert_eq!(fs[0].prime.f_res, 1);
    }

    #[test]
    fn index_prime_valuations() {
        // ξ - ρ for ρ a root mod 23 has norm divisible by 23
        for id in [1, 2] {
            let case = Case::shipped(id).unwrap();
            let f = HField::of(&case);
            let q = -case.d;
            for shift in 0..q {
                let h = &HElem::xi(f) - &HElem::from_int(f, shift);
                primes_above(&h, 1 << 20).unwrap();
            }
        }
    }
}
