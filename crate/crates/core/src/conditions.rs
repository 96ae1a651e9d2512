//! The admissible-k table T₀ ∩ T₁ ∩ T₂.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::cmsetup::CurveData;
use crate::error::Result;
use crate::hfield::symbol::{period_from_engine, FACTOR_BUDGET};
use crate::hfield::{primes_above, HElem, PeriodicSet, PkReduction, SymbolEngine};
use crate::qfield::Case;

/// A symbol input with its odd support, for provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInput {
    pub name: String,
    pub value: HElem,
    /// (q, residue degree, valuation) for each odd prime of O_H dividing the value.
    pub support: Vec<(u64, u32, i64)>,
    pub period_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionTable {
    pub modulus: u64,
    pub residues: BTreeSet<u64>,
    pub exceptions: BTreeSet<u64>,
    pub t1: PeriodicSet,
    pub t2: PeriodicSet,
    pub inputs: Vec<SymbolInput>,
}

impl ConditionTable {
    pub fn admissible(&self, k: u64) -> bool {
        k >= 2 && self.residues.contains(&(k % self.modulus)) && !self.exceptions.contains(&k)
    }

    pub fn admissible_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        (lo.max(2)..=hi).filter(|&k| self.admissible(k)).collect()
    }

    pub fn as_periodic(&self) -> PeriodicSet {
        PeriodicSet {
            modulus: self.modulus,
            residues: self.residues.clone(),
        }
    }
}

fn input(case: &Case, name: &str, value: &HElem) -> Result<(SymbolInput, SymbolEngine)> {
    let engine = SymbolEngine::new(case, value)?;
    let support = primes_above(value, FACTOR_BUDGET)?
        .into_iter()
        .map(|pf| (pf.prime.q, pf.prime.f_res, pf.ord))
        .collect();
    Ok((
        SymbolInput {
            name: name.into(),
            value: value.clone(),
            support,
            period_bound: engine.period_bound,
        },
        engine,
    ))
}

/// k with 𝔭_k | disc(E). Only k with F_k ≤ |N_{H/Q}(disc E)| can occur.
pub fn compute_t0(case: &Case, curve: &CurveData) -> Result<BTreeSet<u64>> {
    let n = curve.disc_e.norm_hq();
    let bound = n.numer().abs() / n.denom().abs();
    let mut out = BTreeSet::new();
    let mut k = 1;
    loop {
        let fk = case.f_k(k);
        if fk > bound {
            break;
        }
        if (n.numer() % &fk).is_zero() {
            // 𝔭_k | disc(E) forces F_k | N(disc E); decide by reducing,
            // and exclude conservatively when the reduction map is undefined
            let zero = match PkReduction::with_modulus(case, k, fk.clone()) {
                Ok(red) => red.reduce(&curve.disc_e).map_or(true, |v| v.is_zero()),
                Err(_) => true,
            };
            if zero {
                out.insert(k);
            }
        }
        k += 1;
    }
    Ok(out)
}

pub fn compute_t1(case: &Case, curve: &CurveData) -> Result<(PeriodicSet, SymbolInput)> {
    let (inp, engine) = input(case, "6·gamma3", &curve.gamma3_times_six())?;
    Ok((period_from_engine(case, &engine, &[1], true)?, inp))
}

pub fn compute_t2(case: &Case, curve: &CurveData) -> Result<(PeriodicSet, SymbolInput)> {
    let (inp, engine) = input(case, "disc_f", &curve.disc_f)?;
    Ok((period_from_engine(case, &engine, &[-1, 0], false)?, inp))
}

pub fn combine(t0: BTreeSet<u64>, t1: PeriodicSet, t2: PeriodicSet, inputs: Vec<SymbolInput>) -> ConditionTable {
    let both = t1.intersect(&t2);
    ConditionTable {
        modulus: both.modulus,
        residues: both.residues,
        exceptions: t0,
        t1,
        t2,
        inputs,
    }
}

pub fn compute_table(case: &Case, curve: &CurveData) -> Result<ConditionTable> {
    let t0 = compute_t0(case, curve)?;
    let (t1, i1) = compute_t1(case, curve)?;
    let (t2, i2) = compute_t2(case, curve)?;
    Ok(combine(t0, t1, t2, vec![i1, i2]))
}
