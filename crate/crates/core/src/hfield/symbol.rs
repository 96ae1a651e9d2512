//! The symbol s_k(a) and its period in k.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::twoadic::{TwoAdicQuotient, R8};
use super::{p_k_elem, primes_above, HElem, PrimeFactor};
use crate::error::{Error, Result};
use crate::ff::FqElem;
use crate::qfield::{Case, TwoPrime};

/// Loop budget for period scans.
pub const PERIOD_BUDGET: u64 = 10_000_000;
/// Iteration budget for Pollard-Brent on target norms.
pub const FACTOR_BUDGET: u64 = 1 << 26;

#[derive(Clone, Debug)]
struct OddSupport {
    factor: PrimeFactor,
    /// (1 − α^j ξ / l) for j in [0, order of α mod l).
    table: Vec<i8>,
}

#[derive(Clone, Debug)]
struct TwoSupport {
    ring: TwoAdicQuotient,
    a: R8,
    /// α mod l³, an element of Z/8 embedded in the quotient.
    alpha: R8,
}

/// Precomputed data to evaluate s_k(a) for many k.
#[derive(Clone, Debug)]
pub struct SymbolEngine {
    odd: Vec<OddSupport>,
    two: Vec<TwoSupport>,
    /// Bound N = lcm(2, orders of α at the odd support).
    pub period_bound: u64,
}

impl SymbolEngine {
    pub fn new(case: &Case, a: &HElem) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::Precondition("symbol of zero".into()));
        }
        let mut bound: u64 = 2;
        let mut odd = vec![];
        for pf in primes_above(a, FACTOR_BUDGET)? {
            if !pf.odd() {
                continue;
            }
            let l = &pf.prime;
            let f = &l.residue;
            let (u, v) = (&case.alpha.a, &case.alpha.b);
            let inv2 = (l.q + 1) / 2;
            let ui = f.constant(crate::arith::mod_u64(u, l.q));
            let vi = f.constant(crate::arith::mod_u64(v, l.q));
            let alpha = f.scale(&f.add(&ui, &f.mul(&vi, &l.sqrt_d)), inv2);
            let ord = f.mult_order(&alpha)?;
            let ord_u = ord.to_u64().filter(|&o| o <= PERIOD_BUDGET).ok_or_else(|| Error::Budget {
                bound: BigInt::from(ord.clone()),
                budget: PERIOD_BUDGET,
            })?;
            bound = bound.lcm(&ord_u);
            if bound > PERIOD_BUDGET {
                return Err(Error::Budget {
                    bound: BigInt::from(bound),
                    budget: PERIOD_BUDGET,
                });
            }
            let mut table = Vec::with_capacity(ord_u as usize);
            let mut ak: FqElem = f.one();
            for _ in 0..ord_u {
                let pk = f.sub(&f.one(), &f.mul(&ak, &l.xi));
                table.push(f.quadratic_char(&pk) as i8);
                ak = f.mul(&ak, &alpha);
            }
            odd.push(OddSupport { factor: pf, table });
        }
        let mut two = vec![];
        for prime in [TwoPrime::Lambda, TwoPrime::LambdaBar] {
            let ring = TwoAdicQuotient::new(case, prime);
            let an = ring.normalize(a)?;
            let alpha = ring.image(&HElem::from_quad(a.field, &case.alpha))?;
            two.push(TwoSupport { ring, a: an, alpha });
        }
        Ok(SymbolEngine {
            odd,
            two,
            period_bound: bound,
        })
    }

    /// The odd primes where a has odd valuation.
    pub fn odd_support(&self) -> Vec<&PrimeFactor> {
        self.odd.iter().map(|o| &o.factor).collect()
    }

    /// Hilbert symbol factor at the prime above 2 for `prime`.
    pub fn two_factor(&self, prime: TwoPrime, k: u64) -> i32 {
        let t = &self.two[if prime == TwoPrime::Lambda { 0 } else { 1 }];
        // p_k = 1 - α^k ξ; ξ is the packed element 8
        let ak = t.ring.pow(t.alpha, k);
        let akxi = t.ring.mul(ak, 8);
        let neg = t.ring.mul(akxi, TwoAdicQuotient::pack([7, 0, 0]));
        let pk = t.ring.add(1, neg);
        t.ring.hilbert_images(t.a, pk)
    }

    pub fn s_k(&self, k: u64) -> i32 {
        let mut s = self.two_factor(TwoPrime::Lambda, k) * self.two_factor(TwoPrime::LambdaBar, k);
        for o in &self.odd {
            let v = o.table[(k % o.table.len() as u64) as usize] as i32;
            if v == 0 {
                return 0;
            }
            s *= v;
        }
        s
    }

    /// s_k values for k = 1..=n, reusing the 2-adic factors (which depend on
    /// k mod 2 only).
    pub fn s_range(&self, n: u64) -> Vec<i32> {
        let two_par = [
            self.two_factor(TwoPrime::Lambda, 2) * self.two_factor(TwoPrime::LambdaBar, 2),
            self.two_factor(TwoPrime::Lambda, 1) * self.two_factor(TwoPrime::LambdaBar, 1),
        ];
        (1..=n)
            .map(|k| {
                let mut s = two_par[(k % 2) as usize];
                for o in &self.odd {
                    let v = o.table[(k % o.table.len() as u64) as usize] as i32;
                    s *= v;
                }
                s
            })
            .collect()
    }
}

/// s_k(a) computed directly from its definition.
pub fn s_k(case: &Case, a: &HElem, k: u64) -> Result<i32> {
    let pk = p_k_elem(case, k);
    let mut s = 1;
    for prime in [TwoPrime::Lambda, TwoPrime::LambdaBar] {
        let ring = TwoAdicQuotient::new(case, prime);
        s *= ring.hilbert_symbol(a, &pk)?;
    }
    for pf in primes_above(a, FACTOR_BUDGET)? {
        let r = pf.prime.residue_symbol(&pk)?;
        if pf.odd() {
            s *= r;
        }
    }
    Ok(s)
}

/// Periodic set of k, as residues modulo M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSet {
    pub modulus: u64,
    pub residues: BTreeSet<u64>,
}

impl PeriodicSet {
    pub fn contains(&self, k: u64) -> bool {
        self.residues.contains(&(k % self.modulus))
    }

    /// The smallest period of a membership pattern over one full period.
    pub fn from_pattern(member: &[bool]) -> Self {
        let n = member.len() as u64;
        let mut divs: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        divs.sort();
        for m in divs {
            let ok = (0..n).all(|i| member[i as usize] == member[((i + m) % n) as usize]);
            if ok {
                // member[i] describes k = i + 1
                let residues = (1..=m).filter(|&k| member[(k - 1) as usize]).map(|k| k % m).collect();
                return PeriodicSet { modulus: m, residues };
            }
        }
        unreachable!("n itself is a period")
    }

    pub fn intersect(&self, o: &PeriodicSet) -> PeriodicSet {
        let m = self.modulus.lcm(&o.modulus);
        let member: Vec<bool> = (1..=m).map(|k| self.contains(k) && o.contains(k)).collect();
        PeriodicSet::from_pattern(&member)
    }
}

/// Minimal period and residue set of {k : s_k(a)·(ε_k if twisted) ∈ S}.
pub fn symbol_period(case: &Case, a: &HElem, allowed: &[i32], sign_twist: bool) -> Result<PeriodicSet> {
    let engine = SymbolEngine::new(case, a)?;
    period_from_engine(case, &engine, allowed, sign_twist)
}

pub fn period_from_engine(
    case: &Case,
    engine: &SymbolEngine,
    allowed: &[i32],
    sign_twist: bool,
) -> Result<PeriodicSet> {
    let n = engine.period_bound;
    let eps = epsilon_by_parity(case)?;
    let member: Vec<bool> = engine
        .s_range(n)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let k = i as u64 + 1;
            let v = if sign_twist { s * eps[(k % 2) as usize] } else { s };
            allowed.contains(&v)
        })
        .collect();
    Ok(PeriodicSet::from_pattern(&member))
}

/// [ε_k for even k, ε_k for odd k], checked to be 2-periodic.
pub fn epsilon_by_parity(case: &Case) -> Result<[i32; 2]> {
    let e = [case.epsilon_k(2), case.epsilon_k(1)];
    for k in 3..=6 {
        if case.epsilon_k(k) != e[(k % 2) as usize] {
            return Err(Error::Internal("ε_k is not 2-periodic".into()));
        }
    }
    Ok(e)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use crate::hfield::{HField, KElem, PkReduction};
    use num_traits::{One, Zero};

    fn sample(f: HField, seed: i64) -> HElem {
        let k = |a: i64, b: i64| KElem::from_quad(&crate::qfield::QuadInt::new(2 * a + b, b, f.d).unwrap());
        HElem::new(f, [k(seed % 7 + 1, seed % 3), k(seed % 5 - 2, 1), k(seed % 4, seed % 2)])
    }

    fn legendre_big(a: &BigInt, n: &BigInt) -> i32 {
        if a.is_zero() {
            return 0;
        }
        let e = (n - 1u32) >> 1;
        if a.modpow(&e, n) == BigInt::one() {
            1
        } else {
            -1
        }
    }

    #[test]
    fn engine_matches_direct_definition() {
        for id in [1, 2] {
            let case = Case::shipped(id).unwrap();
            let f = HField::of(&case);
            for seed in 0..4 {
                let a = sample(f, seed);
                let e = SymbolEngine::new(&case, &a).unwrap();
                for k in 1..=8 {
                    assert_eq!(e.s_k(k), s_k(&case, &a, k).unwrap(), "case {id} seed {seed} k {k}");
                }
            }
        }
    }

    #[test]
    fn symbol_is_legendre_symbol_for_prime_f_k() {
        for id in [1, 2] {
            let case = Case::shipped(id).unwrap();
            let f = HField::of(&case);
            let primes: Vec<u64> = (1..=30)
                .filter(|&k| is_prime(&case.f_k(k).to_biguint().unwrap()))
                .collect();
            assert!(!primes.is_empty());
            for seed in 0..5 {
                let a = sample(f, seed);
                let e = SymbolEngine::new(&case, &a).unwrap();
                for &k in &primes {
                    let red = PkReduction::new(&case, k).unwrap();
                    assert!(red.check(&case));
                    let img = red.reduce(&a).unwrap();
                    assert_eq!(e.s_k(k), legendre_big(&img, &red.n), "case {id} seed {seed} k {k}");
                }
            }
        }
    }

    #[test]
    fn period_matches_oversampling() {
        let case = Case::shipped(1).unwrap();
        let f = HField::of(&case);
        let a = sample(f, 3);
        let e = SymbolEngine::new(&case, &a).unwrap();
        let t = period_from_engine(&case, &e, &[1], true).unwrap();
        assert_eq!(e.period_bound % t.modulus, 0);
        let eps = epsilon_by_parity(&case).unwrap();
        for k in 1..=3 * t.modulus + 10 {
            let v = e.s_k(k) * eps[(k % 2) as usize];
            assert_eq!(t.contains(k), v == 1);
        }
    }

    #[test]
    fn pattern_period_is_minimal() {
        let p = PeriodicSet::from_pattern(&[true, false, true, false, true, false]);
        assert_eq!(p.modulus, 2);
        assert_eq!(p.residues.iter().copied().collect::<Vec<_>>(), vec![1]);
        let q = PeriodicSet::from_pattern(&[false, false, true]);
        assert_eq!(q.modulus, 3);
        assert!(q.contains(3) && q.contains(6) && !q.contains(4));
    }
}
