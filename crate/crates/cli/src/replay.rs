//! A small certificate checker that shares no modular or curve arithmetic
//! with the prover. It uses plain big integers with the same projective
//! formulas and window ladder, so a replayed Q must match the recorded one
//! exactly.

use anyhow::{bail, ensure, Result};
use cmprime_core::prover::{reduce_helem, SequenceParams};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cert::CertRecord;

struct Ring<'a> {
    n: &'a BigUint,
}

impl Ring<'_> {
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % self.n
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + self.n - b) % self.n
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % self.n
    }
}

type Pt = [BigUint; 3];

fn double(f: &Ring, a: &BigUint, p: &Pt) -> Pt {
    let [x, y, z] = p;
    if z.is_zero() {
        return p.clone();
    }
    let xx = f.mul(x, x);
    let zz = f.mul(z, z);
    let w = f.add(&f.mul(a, &zz), &f.mul(&BigUint::from(3u32), &xx));
    let s = f.mul(&BigUint::from(2u32), &f.mul(y, z));
    let sss = f.mul(&s, &f.mul(&s, &s));
    let r = f.mul(y, &s);
    let rr = f.mul(&r, &r);
    let xr = f.add(x, &r);
    let bb = f.sub(&f.sub(&f.mul(&xr, &xr), &xx), &rr);
    let h = f.sub(&f.mul(&w, &w), &f.add(&bb, &bb));
    let y3 = f.sub(&f.mul(&w, &f.sub(&bb, &h)), &f.add(&rr, &rr));
    [f.mul(&h, &s), y3, sss]
}

fn add(f: &Ring, a: &BigUint, p: &Pt, q: &Pt) -> Pt {
    if p[2].is_zero() {
        return q.clone();
    }
    if q[2].is_zero() {
        return p.clone();
    }
    let y1z2 = f.mul(&p[1], &q[2]);
    let x1z2 = f.mul(&p[0], &q[2]);
    let z1z2 = f.mul(&p[2], &q[2]);
    let u = f.sub(&f.mul(&q[1], &p[2]), &y1z2);
    let v = f.sub(&f.mul(&q[0], &p[2]), &x1z2);
    if u.is_zero() && v.is_zero() {
        return double(f, a, p);
    }
    let vv = f.mul(&v, &v);
    let vvv = f.mul(&v, &vv);
    let r = f.mul(&vv, &x1z2);
    let aa = f.sub(&f.sub(&f.mul(&f.mul(&u, &u), &z1z2), &vvv), &f.add(&r, &r));
    let y3 = f.sub(&f.mul(&u, &f.sub(&r, &aa)), &f.mul(&vvv, &y1z2));
    [f.mul(&v, &aa), y3, f.mul(&vvv, &z1z2)]
}

fn ladder(f: &Ring, a: &BigUint, p: &Pt, n: &BigUint) -> Pt {
    let o: Pt = [BigUint::zero(), BigUint::one(), BigUint::zero()];
    let mut table = vec![o.clone(), p.clone()];
    for i in 2..16 {
        let t = if i % 2 == 0 { double(f, a, &table[i / 2]) } else { add(f, a, &table[i - 1], p) };
        table.push(t);
    }
    let digits = ((n.bits() + 3) / 4).max(1);
    let mut acc = o;
    for i in (0..digits).rev() {
        if i + 1 < digits {
            for _ in 0..4 {
                acc = double(f, a, &acc);
            }
        }
        let d = (0..4).fold(0usize, |d, b| d | ((n.bit(i * 4 + b) as usize) << b));
        if d != 0 {
            acc = add(f, a, &acc, &table[d]);
        }
    }
    acc
}

fn residue(x: i64, n: &BigUint) -> BigUint {
    BigInt::from(x).mod_floor(&BigInt::from(n.clone())).to_biguint().unwrap_or_default()
}

fn sqrt_candidate(a: &BigUint, n: &BigUint) -> Result<BigUint> {
    let m: u32 = (n % 8u32).try_into()?;
    Ok(match m {
        3 | 7 => a.modpow(&((n + 1u32) >> 2), n),
        5 => {
            let two_a = (a * 2u32) % n;
            let v = two_a.modpow(&((n - 5u32) >> 3), n);
            let i = (&two_a * &v * &v) % n;
            (a * &v % n) * ((i + n - 1u32) % n) % n
        }
        _ => bail!("modulus ≡ 1 (mod 8)"),
    })
}

/// Image of α under √D ↦ r, or None when it is not a unit.
fn alpha_inverse_power(params: &SequenceParams, r: &BigUint, n: &BigUint, k: u64) -> Option<BigUint> {
    let al = &params.case.alpha;
    let nn = BigInt::from(n.clone());
    let two_inv = (n + 1u32) >> 1;
    let a = ((&al.a + &al.b * BigInt::from(r.clone())) * BigInt::from(two_inv)).mod_floor(&nn);
    let ak = a.modpow(&BigInt::from(k), &nn);
    let e = ak.extended_gcd(&nn);
    e.gcd.is_one().then(|| e.x.mod_floor(&nn).to_biguint().unwrap_or_default())
}

fn cubic(params: &SequenceParams, t: &BigUint, n: &BigUint) -> BigUint {
    let c = &params.case;
    (t * t * t + residue(c.c1, n) * t + residue(c.c0, n)) % n
}

/// Re-derives the verdict of a certificate and checks every recorded value.
pub fn replay(params: &SequenceParams, rec: &CertRecord) -> Result<bool> {
    let c = rec.to_cert()?;
    let case = &params.case;
    ensure!(c.case_id == case.id, "certificate is for case {}", c.case_id);
    let n = case.f_k(c.k).to_biguint().unwrap_or_default();
    ensure!(c.f_k == n, "F_k does not match k");
    let (_, cof, _) = case.cofactor(c.k)?;
    ensure!(Some(c.cofactor.clone()) == cof.to_biguint(), "cofactor does not match k");
    ensure!(c.doublings == 6 * c.k - 1, "wrong number of doublings");
    let d = residue(case.d, &n);
    let r0 = sqrt_candidate(&d, &n)?;
    let roots = [r0.clone(), (&n - &r0) % &n];

    let Some(q) = &c.q else {
        ensure!(!c.verdict, "a prime verdict needs a final point");
        match c.reason.as_deref() {
            Some("D has no square root") => ensure!((&r0 * &r0) % &n != d, "D does have a square root"),
            Some("α is not invertible") => {
                ensure!(roots.iter().any(|r| alpha_inverse_power(params, r, &n, c.k).is_none()), "α is invertible")
            }
            Some("no root of the cubic") => {
                for r in &roots {
                    let t = alpha_inverse_power(params, r, &n, c.k);
                    ensure!(t.is_some_and(|t| !cubic(params, &t, &n).is_zero()), "the cubic has a root");
                }
            }
            Some("curve does not reduce") => {
                let red = |e| reduce_helem(e, &c.r, &c.xi_res, &n);
                let cd = &params.curve;
                ensure!(red(&cd.a).is_none() || red(&cd.b).is_none() || red(&cd.beta).is_none(), "the curve reduces");
            }
            other => bail!("unknown early stop {other:?}"),
        }
        return Ok(false);
    };

    ensure!(roots.contains(&c.r) && (&c.r * &c.r) % &n == d, "r is not the square root in use");
    ensure!((&roots[c.sign_flips as usize]) == &c.r, "sign flip count does not match r");
    let t = alpha_inverse_power(params, &c.r, &n, c.k);
    ensure!(t.as_ref() == Some(&c.xi_res), "xi_res is not α^(−k)");
    ensure!(cubic(params, &c.xi_res, &n).is_zero(), "xi_res is not a root of the cubic");
    let cd = &params.curve;
    for (e, v) in [(&cd.a, &c.a), (&cd.b, &c.b), (&cd.beta, &c.beta)] {
        ensure!(reduce_helem(e, &c.r, &c.xi_res, &n).as_ref() == Some(v), "reduced curve does not match");
    }
    ensure!((&c.beta * &c.beta) % &n == c.b, "beta² ≠ B");

    let f = Ring { n: &n };
    let p: Pt = [BigUint::zero(), c.beta.clone(), BigUint::one()];
    let mut qq = ladder(&f, &c.a, &p, &c.cofactor);
    for _ in 0..c.doublings {
        qq = double(&f, &c.a, &qq);
    }
    ensure!(&qq == q, "final point differs");
    let nonzero = qq[2].gcd(&n).is_one();
    let z2 = double(&f, &c.a, &qq)[2].clone();
    let verdict = nonzero && z2.is_zero();
    if nonzero {
        ensure!(c.z_2q.as_ref() == Some(&z2), "Z of [2]Q differs");
    }
    ensure!(verdict == c.verdict, "verdict differs");
    Ok(verdict)
}
