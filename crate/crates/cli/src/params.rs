//! The parameter file: a versioned JSON document with every integer in
//! canonical decimal.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use cmprime_core::cmsetup::{CurveData, DEFAULT_SEED};
use cmprime_core::conditions::{combine, ConditionTable, SymbolInput};
use cmprime_core::hfield::{HElem, HField, PeriodicSet};
use cmprime_core::prover::SequenceParams;
use cmprime_core::qfield::{Case, QuadInt};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "cmprime-params";
pub const VERSION: u32 = 1;

/// Combined moduli published for the two shipped sequences, kept for
/// reporting next to the derived ones.
pub fn reference_modulus(case_id: u8) -> Option<u64> {
    match case_id {
        1 => Some(1320),
        2 => Some(7920),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub format: String,
    pub version: u32,
    pub case: CaseDoc,
    pub curve: CurveDoc,
    pub conditions: TableDoc,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDoc {
    pub id: u8,
    pub d: String,
    pub c1: String,
    pub c0: String,
    /// α = (alpha[0] + alpha[1]·√D)/2.
    pub alpha: [String; 2],
}

/// Coordinates (x0, y0, x1, y1, x2, y2) of Σ (x_i + y_i√D)·ξ^i.
pub type HDoc = [String; 6];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub class_poly: Vec<String>,
    pub j: HDoc,
    pub u: HDoc,
    pub a: HDoc,
    pub b: HDoc,
    pub beta: HDoc,
    pub gamma3: HDoc,
    pub e_lambda: HDoc,
    pub e_lambda_bar: HDoc,
    pub e_other: HDoc,
    pub a_prime: HDoc,
    pub b_prime: HDoc,
    pub x0: HDoc,
    pub f_coeffs: [HDoc; 3],
    pub disc_f: HDoc,
    pub disc_e: HDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicDoc {
    pub modulus: u64,
    pub residues: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub name: String,
    pub value: HDoc,
    /// (q, residue degree, valuation) per odd prime in the support.
    pub support: Vec<(u64, u32, i64)>,
    pub period_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub exceptions: Vec<u64>,
    pub t1: PeriodicDoc,
    pub t2: PeriodicDoc,
    pub inputs: Vec<InputDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub aux_primes: Vec<u64>,
    pub seed: u64,
    pub conventions: Vec<(String, String)>,
    pub reference_modulus: Option<u64>,
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let r = BigRational::from_str(s).map_err(|e| anyhow::anyhow!("bad rational {s:?}: {e}"))?;
    ensure!(rat_str(&r) == s, "rational {s:?} is not in canonical form");
    Ok(r)
}

fn parse_int(s: &str) -> Result<BigInt> {
    let n = BigInt::from_str(s).map_err(|e| anyhow::anyhow!("bad integer {s:?}: {e}"))?;
    ensure!(n.to_string() == s, "integer {s:?} is not in canonical form");
    Ok(n)
}

fn parse_i64(s: &str) -> Result<i64> {
    i64::try_from(parse_int(s)?).context("integer out of range")
}

fn h_doc(e: &HElem) -> HDoc {
    e.coords().map(|c| rat_str(&c))
}

fn h_parse(f: HField, d: &HDoc) -> Result<HElem> {
    let mut v = Vec::with_capacity(6);
    for s in d {
        v.push(parse_rat(s)?);
    }
    let v: [BigRational; 6] = v.try_into().expect("six coordinates");
    Ok(HElem::from_coords(f, v))
}

fn periodic_doc(p: &PeriodicSet) -> PeriodicDoc {
    PeriodicDoc {
        modulus: p.modulus,
        residues: p.residues.iter().copied().collect(),
    }
}

fn periodic_parse(d: &PeriodicDoc) -> Result<PeriodicSet> {
    ensure!(d.modulus >= 1, "zero modulus");
    ensure!(d.residues.iter().all(|&r| r < d.modulus), "residue out of range");
    ensure!(d.residues.windows(2).all(|w| w[0] < w[1]), "residues not strictly increasing");
    Ok(PeriodicSet {
        modulus: d.modulus,
        residues: d.residues.iter().copied().collect(),
    })
}

fn conventions() -> Vec<(String, String)> {
    [
        ("lambda", "prime of K above 2 that divides alpha"),
        ("j", "root of H_D fixed by the conjugation of K"),
        ("model", "y^2 = x^3 + A x + B with A = A0 u^2, B = B0 u^3, u = B0, P = (0, beta)"),
        ("scalar", "2^(6k-1) * C_k, C_k odd part of N(c1 + c0 alpha^k)"),
        ("cofactor_gate", "v2(N(c1 + c0 alpha^k)) < 6k"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

impl ParamFile {
    pub fn from_params(p: &SequenceParams) -> Self {
        let c = &p.curve;
        let t = &p.table;
        ParamFile {
            format: FORMAT.into(),
            version: VERSION,
            case: CaseDoc {
                id: p.case.id,
                d: p.case.d.to_string(),
                c1: p.case.c1.to_string(),
                c0: p.case.c0.to_string(),
                alpha: [p.case.alpha.a.to_string(), p.case.alpha.b.to_string()],
            },
            curve: CurveDoc {
                class_poly: c.class_poly.iter().map(|x| x.to_string()).collect(),
                j: h_doc(&c.j),
                u: h_doc(&c.u),
                a: h_doc(&c.a),
                b: h_doc(&c.b),
                beta: h_doc(&c.beta),
                gamma3: h_doc(&c.gamma3),
                e_lambda: h_doc(&c.e_lambda),
                e_lambda_bar: h_doc(&c.e_lambda_bar),
                e_other: h_doc(&c.e_other),
                a_prime: h_doc(&c.a_prime),
                b_prime: h_doc(&c.b_prime),
                x0: h_doc(&c.x0),
                f_coeffs: [h_doc(&c.f_coeffs[0]), h_doc(&c.f_coeffs[1]), h_doc(&c.f_coeffs[2])],
                disc_f: h_doc(&c.disc_f),
                disc_e: h_doc(&c.disc_e),
            },
            conditions: TableDoc {
                modulus: t.modulus,
                residues: t.residues.iter().copied().collect(),
                exceptions: t.exceptions.iter().copied().collect(),
                t1: periodic_doc(&t.t1),
                t2: periodic_doc(&t.t2),
                inputs: t
                    .inputs
                    .iter()
                    .map(|i| InputDoc {
                        name: i.name.clone(),
                        value: h_doc(&i.value),
                        support: i.support.clone(),
                        period_bound: i.period_bound,
                    })
                    .collect(),
            },
            provenance: Provenance {
                aux_primes: vec![p.case.aux_prime],
                seed: DEFAULT_SEED,
                conventions: conventions(),
                reference_modulus: reference_modulus(p.case.id),
            },
        }
    }

    /// Rebuilds the parameters and re-checks every structural invariant.
    pub fn to_params(&self) -> Result<SequenceParams> {
        ensure!(self.format == FORMAT, "not a parameter file (format {:?})", self.format);
        ensure!(self.version == VERSION, "unsupported parameter file version {}", self.version);
        let aux = *self.provenance.aux_primes.first().context("no auxiliary prime")?;
        let d = parse_i64(&self.case.d)?;
        let case = Case {
            id: self.case.id,
            d,
            c1: parse_i64(&self.case.c1)?,
            c0: parse_i64(&self.case.c0)?,
            alpha: QuadInt::new(parse_int(&self.case.alpha[0])?, parse_int(&self.case.alpha[1])?, d)?,
            aux_prime: aux,
        };
        case.validate()?;
        let f = HField::of(&case);
        let cd = &self.curve;
        let curve = CurveData {
            class_poly: cd.class_poly.iter().map(|s| parse_int(s)).collect::<Result<_>>()?,
            j: h_parse(f, &cd.j)?,
            u: h_parse(f, &cd.u)?,
            a: h_parse(f, &cd.a)?,
            b: h_parse(f, &cd.b)?,
            beta: h_parse(f, &cd.beta)?,
            gamma3: h_parse(f, &cd.gamma3)?,
            e_lambda: h_parse(f, &cd.e_lambda)?,
            e_lambda_bar: h_parse(f, &cd.e_lambda_bar)?,
            e_other: h_parse(f, &cd.e_other)?,
            a_prime: h_parse(f, &cd.a_prime)?,
            b_prime: h_parse(f, &cd.b_prime)?,
            x0: h_parse(f, &cd.x0)?,
            f_coeffs: [
                h_parse(f, &cd.f_coeffs[0])?,
                h_parse(f, &cd.f_coeffs[1])?,
                h_parse(f, &cd.f_coeffs[2])?,
            ],
            disc_f: h_parse(f, &cd.disc_f)?,
            disc_e: h_parse(f, &cd.disc_e)?,
        };
        curve.validate(&case)?;
        // only 2-power denominators reduce modulo every F_k
        for e in [&curve.a, &curve.b, &curve.beta] {
            let den = e.denom();
            let odd = &den >> den.trailing_zeros().unwrap_or(0);
            ensure!(odd == BigInt::from(1), "curve coefficients have odd denominators");
        }
        let td = &self.conditions;
        let t1 = periodic_parse(&td.t1)?;
        let t2 = periodic_parse(&td.t2)?;
        let mut inputs = Vec::new();
        for i in &td.inputs {
            inputs.push(SymbolInput {
                name: i.name.clone(),
                value: h_parse(f, &i.value)?,
                support: i.support.clone(),
                period_bound: i.period_bound,
            });
        }
        let exceptions: BTreeSet<u64> = td.exceptions.iter().copied().collect();
        let table: ConditionTable = combine(exceptions, t1, t2, inputs);
        ensure!(
            table.modulus == td.modulus && table.residues.iter().copied().eq(td.residues.iter().copied()),
            "condition table is not the intersection of T1 and T2"
        );
        if let [i1, i2] = &table.inputs[..] {
            ensure!(i1.value == curve.gamma3_times_six() && i2.value == curve.disc_f, "symbol inputs do not match the curve");
        } else {
            bail!("expected two symbol inputs");
        }
        Ok(SequenceParams { case, curve, table })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<(ParamFile, SequenceParams)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: ParamFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let params = doc.to_params().with_context(|| format!("validating {}", path.display()))?;
        Ok((doc, params))
    }
}
