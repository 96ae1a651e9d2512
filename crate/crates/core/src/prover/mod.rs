//! The per-k primality decision modulo F_k.

pub mod curve;
pub mod modarith;
pub mod ntt;

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cmsetup::CurveData;
use crate::conditions::ConditionTable;
use crate::error::{Error, Result};
use crate::hfield::local::mod_inverse;
use crate::hfield::{HElem, PkReduction};
use crate::qfield::Case;
pub use curve::{Curve, ProjPoint};
pub use modarith::{Backend, ModCtx};

/// Everything that defines one sequence and its prover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceParams {
    pub case: Case,
    pub curve: CurveData,
    pub table: ConditionTable,
}

impl SequenceParams {
    pub fn derive(case_id: u8) -> Result<Self> {
        let case = Case::shipped(case_id)?;
        let curve = crate::cmsetup::derive(&case)?;
        let table = crate::conditions::compute_table(&case, &curve)?;
        Ok(SequenceParams { case, curve, table })
    }
}

/// The replayable transcript of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub case_id: u8,
    pub k: u64,
    pub f_k: BigUint,
    /// Square root of D modulo F_k selected by the cubic check.
    pub r: BigUint,
    /// Image of ξ, i.e. α^{−k} modulo F_k.
    pub xi_res: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub beta: BigUint,
    pub cofactor: BigUint,
    /// Number of doublings applied after the cofactor ladder (6k − 1).
    pub doublings: u64,
    pub scalar_bits: u64,
    pub q: Option<[BigUint; 3]>,
    pub z_2q: Option<BigUint>,
    pub verdict: bool,
    /// Where the run stopped with a composite verdict, if early.
    pub reason: Option<String>,
    pub sign_flips: u8,
    pub wall_ms: u64,
}

/// A square root of a modulo n for n ≢ 1 (mod 8). The caller must verify
/// the result, since n need not be prime.
pub fn sqrt_mod(a: &BigUint, n: &BigUint) -> Result<BigUint> {
    let ctx = ModCtx::new(n, Backend::Auto)?;
    let r = sqrt_mod_ctx(&ctx, &ctx.from_big(a))?;
    Ok(ctx.to_big(&r))
}

fn sqrt_mod_ctx(ctx: &ModCtx, a: &modarith::Elem) -> Result<modarith::Elem> {
    let n = ctx.modulus();
    match (n % 8u32).try_into().unwrap_or(0u32) {
        3 | 7 => Ok(ctx.pow(a, &((n + 1u32) >> 2))),
        5 => {
            let two_a = ctx.dbl(a);
            let v = ctx.pow(&two_a, &((n - 5u32) >> 3));
            let i = ctx.mul(&two_a, &ctx.sqr(&v));
            Ok(ctx.mul(&ctx.mul(a, &v), &ctx.sub(&i, &ctx.one())))
        }
        _ => Err(Error::Precondition("square roots need N ≢ 1 (mod 8)".into())),
    }
}

/// Image of e under √D ↦ r, ξ ↦ xi_res; None if a denominator is not
/// invertible modulo n.
pub fn reduce_helem(e: &HElem, r: &BigUint, xi_res: &BigUint, n: &BigUint) -> Option<BigUint> {
    let red = PkReduction {
        n: BigInt::from(n.clone()),
        sqrt_d: BigInt::from(r.clone()),
        xi: BigInt::from(xi_res.clone()),
    };
    red.reduce(e).and_then(|v| v.to_biguint())
}

/// gcd(Z, N) = 1.
pub fn strongly_nonzero(z: &BigUint, n: &BigUint) -> bool {
    z.gcd(n).is_one()
}

fn signed_mod(x: i64, n: &BigUint) -> BigUint {
    let v = BigInt::from(x).mod_floor(&BigInt::from(n.clone()));
    v.to_biguint().unwrap_or_default()
}

fn quad_mod(q: &crate::qfield::QuadInt, r: &BigUint, inv2: &BigUint, n: &BigUint) -> BigUint {
    let nn = BigInt::from(n.clone());
    let v = (&q.a + &q.b * BigInt::from(r.clone())) * BigInt::from(inv2.clone());
    v.mod_floor(&nn).to_biguint().unwrap_or_default()
}

/// Runs the proving loop for k without consulting the condition table.
/// Its True verdict is a proof only for admissible k.
#[derive(Clone, Debug)]
pub struct Prover<'a> {
    pub case: &'a Case,
    pub curve: &'a CurveData,
    pub backend: Backend,
    /// Finish every step even after a composite witness (for timing).
    pub full_work: bool,
}

impl<'a> Prover<'a> {
    pub fn new(case: &'a Case, curve: &'a CurveData, backend: Backend) -> Self {
        Prover {
            case,
            curve,
            backend,
            full_work: false,
        }
    }

    pub fn run(&self, k: u64) -> Result<Certificate> {
        let start = Instant::now();
        let case = self.case;
        if k == 0 {
            return Err(Error::UnsupportedK(k));
        }
        let (_, cofactor, _) = case.cofactor(k)?;
        let cofactor = cofactor.to_biguint().ok_or_else(|| Error::Internal("negative cofactor".into()))?;
        let n = case.f_k(k).to_biguint().ok_or_else(|| Error::Internal("F_k ≤ 0".into()))?;
        let rem: u32 = (&n % 8u32).try_into().unwrap_or(0);
        if ![3, 5, 7].contains(&rem) {
            return Err(Error::Internal(format!("F_{k} ≡ {rem} (mod 8)")));
        }
        let ctx = ModCtx::new(&n, self.backend)?;
        let mut cert = Certificate {
            case_id: case.id,
            k,
            f_k: n.clone(),
            r: BigUint::zero(),
            xi_res: BigUint::zero(),
            a: BigUint::zero(),
            b: BigUint::zero(),
            beta: BigUint::zero(),
            cofactor: cofactor.clone(),
            doublings: 6 * k - 1,
            scalar_bits: cofactor.bits() + 6 * k - 1,
            q: None,
            z_2q: None,
            verdict: false,
            reason: None,
            sign_flips: 0,
            wall_ms: 0,
        };
        let finish = |mut c: Certificate, reason: Option<&str>| {
            c.reason = reason.map(str::to_string);
            c.wall_ms = start.elapsed().as_millis() as u64;
            c
        };

        // In full-work mode an early composite exit is recorded but the
        // remaining steps still run on stand-in values, so that timings
        // reflect the whole algorithm.
        let mut stop: Option<&'static str> = None;
        let d = signed_mod(case.d, &n);
        let r0 = ctx.to_big(&sqrt_mod_ctx(&ctx, &ctx.from_big(&d))?);
        if (&r0 * &r0) % &n != d {
            stop = Some("D has no square root");
            if !self.full_work {
                return Ok(finish(cert, stop));
            }
        }
        let inv2 = (&n + 1u32) >> 1;
        let mut found = None;
        if stop.is_none() {
            for (flips, r) in [r0.clone(), (&n - &r0) % &n].into_iter().enumerate() {
                let a = quad_mod(&case.alpha, &r, &inv2, &n);
                let ak = a.modpow(&BigUint::from(k), &n);
                let Some(t) = mod_inverse(&BigInt::from(ak), &BigInt::from(n.clone())).and_then(|t| t.to_biguint()) else {
                    stop = Some("α is not invertible");
                    break;
                };
                let cubic = (&t * &t * &t + signed_mod(case.c1, &n) * &t + signed_mod(case.c0, &n)) % &n;
                if cubic.is_zero() {
                    found = Some((r, t, flips as u8));
                    break;
                }
            }
            if found.is_none() && stop.is_none() {
                stop = Some("no root of the cubic");
            }
        }
        if stop.is_some() && !self.full_work {
            return Ok(finish(cert, stop));
        }
        let (r, t, flips) = found.unwrap_or_else(|| (r0.clone(), BigUint::one(), 0));
        cert.r = r.clone();
        cert.xi_res = t.clone();
        cert.sign_flips = flips;
        let reduce = |e: &HElem| reduce_helem(e, &r, &t, &n);
        let reduced = (reduce(&self.curve.a), reduce(&self.curve.b), reduce(&self.curve.beta));
        let (a, b, beta) = match reduced {
            (Some(a), Some(b), Some(beta)) => (a, b, beta),
            _ => {
                stop = stop.or(Some("curve does not reduce"));
                if !self.full_work {
                    return Ok(finish(cert, stop));
                }
                (BigUint::one(), BigUint::one(), BigUint::one())
            }
        };
        cert.a = a.clone();
        cert.b = b.clone();
        cert.beta = beta.clone();
        let ec = Curve::new(&ctx, &a, &b);
        let p = ec.affine(&BigUint::zero(), &beta);
        let q = ec.double_n(&ec.mul(&p, &cofactor), 6 * k - 1);
        let qc = ec.coords(&q);
        let nonzero = strongly_nonzero(&qc[2], &n);
        cert.q = Some(qc);
        let z2 = ctx.to_big(&ec.double(&q).z);
        if stop.is_some() {
            return Ok(finish(cert, stop));
        }
        if !nonzero {
            return Ok(finish(cert, Some("Q is not strongly nonzero")));
        }
        cert.verdict = z2.is_zero();
        cert.z_2q = Some(z2);
        let reason = if cert.verdict { None } else { Some("[2]Q is not the identity") };
        Ok(finish(cert, reason))
    }
}

/// Algorithm gating: k must be admissible and pass the norm and cofactor
/// gates.
pub fn check_supported(params: &SequenceParams, k: u64) -> Result<()> {
    let case = &params.case;
    if !params.table.admissible(k) || !case.norm_gate(k) {
        return Err(Error::UnsupportedK(k));
    }
    let (_, _, e2) = case.cofactor(k)?;
    if e2 >= 6 * k {
        return Err(Error::UnsupportedK(k));
    }
    Ok(())
}

/// The full decision for an admissible k: (F_k is prime, transcript).
pub fn prove(params: &SequenceParams, k: u64, backend: Backend) -> Result<(bool, Certificate)> {
    check_supported(params, k)?;
    let cert = Prover::new(&params.case, &params.curve, backend).run(k)?;
    Ok((cert.verdict, cert))
}
