//! The CM curve over H used by the prover, and the constants derived from it.

pub mod fp;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use crate::hfield::{poly_eval, primes_over, HElem, HField, PrimeIdealH, TwoAdicQuotient};
use crate::numeric::{class_poly, roots_in_h};
use crate::qfield::{Case, QuadInt, TwoPrime};
use fp::{velu2_map, FpCurve, Pt};

pub const DEFAULT_SEED: u64 = 0x00c0_ffee;

/// Everything the condition table and the prover need from the curve
/// E: y² = x³ + Ax + B over H.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveData {
    pub class_poly: Vec<BigInt>,
    pub j: HElem,
    /// Scaling u with A = A₀u², B = B₀u³ for the j-model (A₀, B₀).
    pub u: HElem,
    pub a: HElem,
    pub b: HElem,
    pub beta: HElem,
    pub gamma3: HElem,
    pub e_lambda: HElem,
    pub e_lambda_bar: HElem,
    pub e_other: HElem,
    pub a_prime: HElem,
    pub b_prime: HElem,
    pub x0: HElem,
    /// f = f0 + f1·x + f2·x², lowest degree first.
    pub f_coeffs: [HElem; 3],
    pub disc_f: HElem,
    pub disc_e: HElem,
}

fn h_int(f: HField, n: i64) -> HElem {
    HElem::from_int(f, n)
}

/// Vélu data of the 2-isogeny with kernel (e, 0): (t, A', B').
pub fn velu2(a: &HElem, b: &HElem, e: &HElem) -> (HElem, HElem, HElem) {
    let t = &e.square().scale_int(3) + a;
    let w = e * &t;
    (t.clone(), a - &t.scale_int(5), b - &w.scale_int(7))
}

pub fn j_invariant(a: &HElem, b: &HElem) -> Result<HElem> {
    let a3 = (&a.square() * a).scale_int(4);
    let den = &a3 + &b.square().scale_int(27);
    if den.is_zero() {
        return Err(Error::UnsupportedCurve("singular curve".into()));
    }
    a3.scale_int(1728).div(&den)
}

pub fn discriminant(a: &HElem, b: &HElem) -> HElem {
    let a3 = (&a.square() * a).scale_int(4);
    (&a3 + &b.square().scale_int(27)).scale_int(-16)
}

/// The root of H_D in H whose coordinates are all rational.
pub fn j_in_h(case: &Case, h: &[BigInt]) -> Result<HElem> {
    let f = HField::of(case);
    let poly: Vec<HElem> = h.iter().map(|c| HElem::from_big(f, c.clone())).collect();
    let js = roots_in_h(f, &poly, 3)?;
    if js.len() != 3 {
        return Err(Error::Precision(format!("found {} of 3 roots of H_D in H", js.len())));
    }
    let real: Vec<&HElem> = js.iter().filter(|x| x.conj_k() == **x).collect();
    if real.len() != 1 {
        return Err(Error::Internal("expected a single root of H_D fixed by √D ↦ −√D".into()));
    }
    let j = real[0].clone();
    // the conjugates of j under Gal(H/K) are the three roots
    for s in xi_conjugates(case)? {
        let js_ = j.substitute_xi(&s);
        if !js.contains(&js_) {
            return Err(Error::Internal("a conjugate of j is not a root of H_D".into()));
        }
    }
    Ok(j)
}

/// The three roots of x³ + c1·x + c0 in H, ξ first.
pub fn xi_conjugates(case: &Case) -> Result<Vec<HElem>> {
    let f = HField::of(case);
    let cubic = vec![h_int(f, case.c0), h_int(f, case.c1), HElem::zero(f), HElem::one(f)];
    let mut r = roots_in_h(f, &cubic, 3)?;
    if r.len() != 3 {
        return Err(Error::Precision("conjugates of ξ not recognized".into()));
    }
    let xi = HElem::xi(f);
    r.sort_by_key(|x| *x != xi);
    if r[0] != xi {
        return Err(Error::Internal("ξ is not among the roots of its minimal polynomial".into()));
    }
    Ok(r)
}

/// σ_λ(ξ) for the Frobenius σ_λ of the prime λ above 2 (inert in H/K):
/// the conjugate congruent to ξ² modulo λ.
pub fn frobenius_lambda(case: &Case) -> Result<HElem> {
    let q = TwoAdicQuotient::new(case, TwoPrime::Lambda);
    let f = HField::of(case);
    let xi2 = q.image(&HElem::xi(f).square())?;
    let mod2 = |x: u16| TwoAdicQuotient::digits(x).map(|d| d % 2);
    let mut hits = vec![];
    for s in xi_conjugates(case)? {
        if mod2(q.image(&s)?) == mod2(xi2) {
            hits.push(s);
        }
    }
    if hits.len() != 1 {
        return Err(Error::Internal("Frobenius at λ not determined".into()));
    }
    Ok(hits.pop().unwrap())
}

/// A degree-one prime of H above the split prime p.
pub fn degree_one_prime(f: HField, p: u64) -> Result<PrimeIdealH> {
    primes_over(f, p)?
        .into_iter()
        .find(|l| l.f_res == 1 && !matches!(l.k_level, crate::hfield::KLevel::Ramified))
        .ok_or_else(|| Error::Parameter(format!("{p} has no degree-one prime in H")))
}

fn reduce_u64(l: &PrimeIdealH, h: &HElem) -> Result<u64> {
    Ok(l.reduce(h)?[0])
}

/// The generator π = (u + v√D)/2 of 𝔭 ∩ O_K, determined up to sign.
pub fn pi_below(case: &Case, l: &PrimeIdealH) -> Result<QuadInt> {
    let p = l.q as i64;
    let r = l.sqrt_d[0] as i64;
    let d = case.d;
    let mut v = 1i64;
    while -d * v * v <= 4 * p {
        let u2 = 4 * p + d * v * v;
        let u = (u2 as f64).sqrt().round() as i64;
        if u * u == u2 {
            for u in [u, -u] {
                if (u + v * r).rem_euclid(p) == 0 {
                    return QuadInt::new(u, v, d);
                }
            }
        }
        v += 1;
    }
    Err(Error::Internal(format!("no element of norm {p} in O_K")))
}

/// s with Frobenius = s·[π] on the reduction, from the point count.
fn frobenius_sign(curve: &FpCurve, pi: &QuadInt) -> Result<i64> {
    let n = curve.order() as i64;
    let tr = pi.trace().to_i64().unwrap();
    let diff = curve.p as i64 + 1 - n;
    match diff {
        _ if tr != 0 && diff == tr => Ok(1),
        _ if tr != 0 && diff == -tr => Ok(-1),
        _ => Err(Error::Internal(format!(
            "trace of Frobenius {diff} is not ±{tr}; curve lacks CM by O_K"
        ))),
    }
}

fn two_adic_valuation(case: &Case, x: &QuadInt, prime: TwoPrime) -> u32 {
    let img = case.two_adic_image(x, prime, 128);
    if img.is_zero() {
        128
    } else {
        img.trailing_zeros().unwrap() as u32
    }
}

fn reduced_curve(l: &PrimeIdealH, a: &HElem, b: &HElem) -> Result<FpCurve> {
    let c = FpCurve::new(l.q, reduce_u64(l, a)?, reduce_u64(l, b)?);
    if c.discriminant_is_zero() {
        return Err(Error::Precondition(format!("bad reduction at {}", l.q)));
    }
    Ok(c)
}

/// Index of the 2-torsion root fixed by the 2-Sylow structure of E mod 𝔭,
/// labeled λ or λ̄; None when the prime is not informative.
fn sylow_label(case: &Case, a: &HElem, b: &HElem, es: &[HElem; 3], p: u64) -> Result<Option<(usize, TwoPrime)>> {
    let f = HField::of(case);
    let l = degree_one_prime(f, p)?;
    let curve = match reduced_curve(&l, a, b) {
        Ok(c) => c,
        Err(_) => return Ok(None),
    };
    let pi = pi_below(case, &l)?;
    let s = frobenius_sign(&curve, &pi)?;
    let sp = &QuadInt::from_int(s, case.d) * &pi;
    let m = &sp - &QuadInt::one(case.d);
    let va = two_adic_valuation(case, &m, TwoPrime::Lambda);
    let vb = two_adic_valuation(case, &m, TwoPrime::LambdaBar);
    if va == vb || va == 0 || vb == 0 {
        return Ok(None);
    }
    let mut depths = vec![];
    for e in es {
        let x = reduce_u64(&l, e)?;
        let pt: Pt = Some((x, 0));
        if !curve.contains(&pt) {
            return Err(Error::Internal("2-torsion root does not reduce to a 2-torsion point".into()));
        }
        depths.push(curve.two_depth(&pt));
    }
    let (hi, lo) = (va.max(vb) - 1, va.min(vb) - 1);
    let top: Vec<usize> = (0..3).filter(|&i| depths[i] == Some(hi)).collect();
    let rest_ok = (0..3).filter(|&i| depths[i] == Some(lo)).count() == 2;
    if top.len() != 1 || !rest_ok {
        return Err(Error::Internal(format!("2-Sylow depths {depths:?} inconsistent with ({va}, {vb})")));
    }
    let label = if vb > va { TwoPrime::LambdaBar } else { TwoPrime::Lambda };
    Ok(Some((top[0], label)))
}

/// Split the roots of x³ + Ax + B into (e_λ, e_λ̄, e_other), where (e, 0)
/// generates E[λ] (resp. E[λ̄]).
pub fn label_two_torsion(case: &Case, a: &HElem, b: &HElem, es: &[HElem; 3]) -> Result<[HElem; 3]> {
    let mut votes: Vec<(usize, TwoPrime)> = vec![];
    let mut p = 3u64;
    let candidates = std::iter::once(case.aux_prime).chain(std::iter::from_fn(|| {
        p += 2;
        Some(p)
    }));
    for q in candidates {
        if votes.len() >= 4 || q > 5000 {
            break;
        }
        if !is_prime_u64(q) || q as i64 == -case.d {
            continue;
        }
        let f = HField::of(case);
        if degree_one_prime(f, q).is_err() {
            continue;
        }
        // coordinates of the roots must be integral at q
        if es.iter().any(|e| crate::hfield::local::q_denominator_exponent(e, q) > 0) {
            continue;
        }
        if let Some(v) = sylow_label(case, a, b, es, q)? {
            votes.push(v);
        }
    }
    if votes.is_empty() {
        return Err(Error::Internal("no informative auxiliary prime for the kernel labeling".into()));
    }
    let out = artin_labels(case, a, b, es)?;
    for (i, label) in votes {
        let want = if label == TwoPrime::Lambda { &out[0] } else { &out[1] };
        if es[i] != *want {
            return Err(Error::Internal(format!(
                "kernel labeling modulo an auxiliary prime disagrees with the Artin action"
            )));
        }
    }
    Ok(out)
}

/// Labels from the Artin action: E/E[𝔞] has j-invariant σ_𝔞(j), with
/// σ_λ̄ = σ_λ⁻¹; the remaining 2-isogeny leaves the maximal order.
fn artin_labels(case: &Case, a: &HElem, b: &HElem, es: &[HElem; 3]) -> Result<[HElem; 3]> {
    let j = j_invariant(a, b)?;
    let s = frobenius_lambda(case)?;
    let j_l = j.substitute_xi(&s);
    let j_lb = j.substitute_xi(&s.substitute_xi(&s));
    let mut idx = [None, None];
    for (i, e) in es.iter().enumerate() {
        let (_, a1, b1) = velu2(a, b, e);
        let j1 = j_invariant(&a1, &b1)?;
        for (slot, target) in [&j_l, &j_lb].into_iter().enumerate() {
            if j1 == *target {
                if idx[slot].is_some() {
                    return Err(Error::Internal("ambiguous kernel labeling".into()));
                }
                idx[slot] = Some(i);
            }
        }
    }
    let (Some(il), Some(ib)) = (idx[0], idx[1]) else {
        return Err(Error::Internal("2-isogeny codomains do not match the conjugates of j".into()));
    };
    let io = 3 - il - ib;
    Ok([es[il].clone(), es[ib].clone(), es[io].clone()])
}

/// Fix the sign of γ₃ = ±t with the Frobenius identity at a degree-one
/// prime above the auxiliary prime p ≡ 3 (mod 4).
pub fn gamma3_with_sign(case: &Case, a: &HElem, b: &HElem, t: &HElem, seed: u64) -> Result<HElem> {
    let p = case.aux_prime;
    if p % 4 != 3 {
        return Err(Error::Parameter("auxiliary prime must be 3 mod 4".into()));
    }
    let f = HField::of(case);
    let l = degree_one_prime(f, p)?;
    let curve = reduced_curve(&l, a, b)?;
    let pi = pi_below(case, &l)?;
    let s = frobenius_sign(&curve, &pi)?;
    let eps = case.epsilon(&pi) as i64;
    let chi = l.residue_symbol(&t.scale_int(6))? as i64;
    if chi == 0 {
        return Err(Error::Parameter("6γ₃ vanishes at the auxiliary prime".into()));
    }
    // [π] acts on E(F_p) as s, so [χ·ε·π]Q = [χ·ε·s]Q
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let trace_check = BigUint::from((p as i64 + 1 - s * pi.trace().to_i64().unwrap()) as u64);
    let mut verdict = None;
    let mut tries = 0;
    while tries < 5 {
        let q = curve.random_point(&mut rng);
        if curve.double(&q).is_none() {
            continue;
        }
        if curve.mul(&q, &trace_check).is_some() {
            return Err(Error::Internal("point order contradicts the Frobenius trace".into()));
        }
        let same = curve.mul_i64(&q, chi * eps * s) == q;
        if verdict.is_some_and(|v| v != same) {
            return Err(Error::Internal("sign test depends on the point".into()));
        }
        verdict = Some(same);
        tries += 1;
    }
    Ok(if verdict.unwrap() { t.clone() } else { -t })
}

/// Derive the curve data for a case.
pub fn derive(case: &Case) -> Result<CurveData> {
    derive_with_seed(case, DEFAULT_SEED)
}

pub fn derive_with_seed(case: &Case, seed: u64) -> Result<CurveData> {
    case.validate()?;
    let h = class_poly(case.d)?;
    let j = j_in_h(case, &h)?;
    derive_from_j(case, h, j, seed)
}

/// Derive the curve data starting from a given root j of H_D in H.
pub fn derive_from_j(case: &Case, h: Vec<BigInt>, j: HElem, seed: u64) -> Result<CurveData> {
    let f = HField::of(case);
    let k1728 = h_int(f, 1728);
    if j.is_zero() || j == k1728 {
        return Err(Error::UnsupportedCurve("j ∈ {0, 1728}".into()));
    }
    let c = &k1728 - &j;
    let a0 = (&j * &c).scale_int(3);
    let b0 = (&(&j * &c) * &c).scale_int(2);
    let w = a0.denom().lcm(&b0.denom());
    let w_h = HElem::from_big(f, w.clone());
    let u = &b0 * &w_h.square();
    let a = &a0 * &u.square();
    let b = &b0 * &(&u.square() * &u);
    let beta = &b0.square() * &(&w_h.square() * &w_h);

    let cubic0 = vec![b0.clone(), a0.clone(), HElem::zero(f), HElem::one(f)];
    let roots0 = roots_in_h(f, &cubic0, 3)?;
    if roots0.len() != 3 {
        return Err(Error::Internal("x³ + A₀x + B₀ does not split over H".into()));
    }
    let es: [HElem; 3] = [&roots0[0] * &u, &roots0[1] * &u, &roots0[2] * &u];
    let [e_lambda, e_lambda_bar, e_other] = label_two_torsion(case, &a, &b, &es)?;

    let (t, a_prime, b_prime) = velu2(&a, &b, &e_lambda_bar);
    let x0 = &e_lambda + &t.div(&(&e_lambda - &e_lambda_bar))?;
    let (t2, _, _) = velu2(&a_prime, &b_prime, &x0);
    let f_coeffs = [t2.clone(), -&x0, HElem::one(f)];
    let disc_f = &x0.square() - &t2.scale_int(4);

    let jm = &j - &k1728;
    let g = roots_in_h(f, &[-&jm, HElem::zero(f), HElem::one(f)], 2)?;
    let t0 = g
        .into_iter()
        .max_by(|x, y| x.coords().cmp(&y.coords()))
        .ok_or_else(|| Error::Internal("j − 1728 has no square root in H".into()))?;
    let gamma3 = gamma3_with_sign(case, &a, &b, &t0, seed)?;
    let disc_e = discriminant(&a, &b);
    let data = CurveData {
        class_poly: h,
        j,
        u,
        a,
        b,
        beta,
        gamma3,
        e_lambda,
        e_lambda_bar,
        e_other,
        a_prime,
        b_prime,
        x0,
        f_coeffs,
        disc_f,
        disc_e,
    };
    data.validate(case)?;
    Ok(data)
}

impl CurveData {
    /// Exact checks of every structural invariant.
    pub fn validate(&self, case: &Case) -> Result<()> {
        let f = HField::of(case);
        let fail = |what: &str| Err(Error::Internal(format!("curve invariant violated: {what}")));
        if self.beta.square() != self.b {
            return fail("β² = B");
        }
        let k1728 = h_int(f, 1728);
        if self.gamma3.square() != &self.j - &k1728 {
            return fail("γ₃² = j − 1728");
        }
        let h: Vec<HElem> = self.class_poly.iter().map(|c| HElem::from_big(f, c.clone())).collect();
        if !poly_eval(&h, &self.j).is_zero() {
            return fail("H_D(j) = 0");
        }
        if j_invariant(&self.a, &self.b)? != self.j {
            return fail("j(A, B) = j");
        }
        let x = &self.x0;
        if !(&(&x.square() * x) + &(&(&self.a_prime * x) + &self.b_prime)).is_zero() {
            return fail("x₀³ + A′x₀ + B′ = 0");
        }
        let sum = &(&self.e_lambda + &self.e_lambda_bar) + &self.e_other;
        if !sum.is_zero() {
            return fail("2-torsion roots sum to 0");
        }
        for e in [&self.e_lambda, &self.e_lambda_bar, &self.e_other] {
            let v = &(&(&e.square() * e) + &(&self.a * e)) + &self.b;
            if !v.is_zero() {
                return fail("2-torsion root");
            }
        }
        if self.disc_e.is_zero() || self.disc_f.is_zero() {
            return fail("nonzero discriminants");
        }
        let x0 = &self.x0;
        let disc = &x0.square() - &self.f_coeffs[0].scale_int(4);
        if disc != self.disc_f || self.f_coeffs[1] != -x0 {
            return fail("disc(f)");
        }
        Ok(())
    }

    pub fn gamma3_times_six(&self) -> HElem {
        self.gamma3.scale_int(6)
    }

    /// φ̂∘φ = [2] on `count` random points of E modulo a degree-one prime
    /// above p.
    pub fn check_dual_composition(&self, case: &Case, p: u64, count: usize, seed: u64) -> Result<()> {
        let f = HField::of(case);
        let l = degree_one_prime(f, p)?;
        let e = reduced_curve(&l, &self.a, &self.b)?;
        let e1 = reduced_curve(&l, &self.a_prime, &self.b_prime)?;
        let xb = reduce_u64(&l, &self.e_lambda_bar)?;
        let x0 = reduce_u64(&l, &self.x0)?;
        let t = (mul3(xb, xb, p) + e.a) % p;
        let t1 = (mul3(x0, x0, p) + e1.a) % p;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..count {
            let r = e.random_point(&mut rng);
            let img = velu2_map(&e1, x0, t1, &velu2_map(&e, xb, t, &r));
            let two = e.double(&r);
            // the codomain of φ̂∘φ is E scaled by (x, y) ↦ (4x, 8y)
            let scaled = two.map(|(x, y)| (x * 4 % p, y * 8 % p));
            if img != scaled {
                return Err(Error::Internal(format!("φ̂∘φ ≠ [2] modulo {p}")));
            }
        }
        Ok(())
    }

    /// #E(F_p) for a degree-one prime above p equals p + 1 − s·Tr(π), s = ±1.
    pub fn frobenius_trace_at(&self, case: &Case, p: u64) -> Result<(u64, i64)> {
        let l = degree_one_prime(HField::of(case), p)?;
        let e = reduced_curve(&l, &self.a, &self.b)?;
        let pi = pi_below(case, &l)?;
        Ok((e.order(), frobenius_sign(&e, &pi)?))
    }
}

fn mul3(x: u64, y: u64, p: u64) -> u64 {
    (3 * crate::arith::mul_mod(x, y, p)) % p
}

/// log₂ of |N_{H/Q}(x)| for reporting.
pub fn norm_bits(x: &HElem) -> u64 {
    let n = x.norm_hq();
    n.numer().abs().bits()
}
