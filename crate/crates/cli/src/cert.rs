//! Decimal encoding of prover certificates.

use std::str::FromStr;

use anyhow::{ensure, Context, Result};
use cmprime_core::prover::Certificate;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertRecord {
    pub case_id: u8,
    pub k: u64,
    pub f_k: String,
    pub r: String,
    pub xi_res: String,
    pub a: String,
    pub b: String,
    pub beta: String,
    pub cofactor: String,
    pub doublings: u64,
    pub scalar_bits: u64,
    pub q: Option<[String; 3]>,
    pub z_2q: Option<String>,
    pub verdict: bool,
    pub reason: Option<String>,
    pub sign_flips: u8,
    pub wall_ms: u64,
}

fn parse(s: &str) -> Result<BigUint> {
    let n = BigUint::from_str(s).with_context(|| format!("bad decimal {s:?}"))?;
    ensure!(n.to_string() == s, "decimal {s:?} is not canonical");
    Ok(n)
}

impl CertRecord {
    /// Everything except the timing, for run-to-run comparison.
    pub fn same_run(&self, o: &CertRecord) -> bool {
        CertRecord { wall_ms: 0, ..self.clone() } == CertRecord { wall_ms: 0, ..o.clone() }
    }

    pub fn to_cert(&self) -> Result<Certificate> {
        let q = match &self.q {
            Some([x, y, z]) => Some([parse(x)?, parse(y)?, parse(z)?]),
            None => None,
        };
        Ok(Certificate {
            case_id: self.case_id,
            k: self.k,
            f_k: parse(&self.f_k)?,
            r: parse(&self.r)?,
            xi_res: parse(&self.xi_res)?,
            a: parse(&self.a)?,
            b: parse(&self.b)?,
            beta: parse(&self.beta)?,
            cofactor: parse(&self.cofactor)?,
            doublings: self.doublings,
            scalar_bits: self.scalar_bits,
            q,
            z_2q: self.z_2q.as_deref().map(parse).transpose()?,
            verdict: self.verdict,
            reason: self.reason.clone(),
            sign_flips: self.sign_flips,
            wall_ms: self.wall_ms,
        })
    }
}

impl From<&Certificate> for CertRecord {
    fn from(c: &Certificate) -> Self {
        CertRecord {
            case_id: c.case_id,
            k: c.k,
            f_k: c.f_k.to_string(),
            r: c.r.to_string(),
            xi_res: c.xi_res.to_string(),
            a: c.a.to_string(),
            b: c.b.to_string(),
            beta: c.beta.to_string(),
            cofactor: c.cofactor.to_string(),
            doublings: c.doublings,
            scalar_bits: c.scalar_bits,
            q: c.q.as_ref().map(|q| q.clone().map(|x| x.to_string())),
            z_2q: c.z_2q.as_ref().map(|z| z.to_string()),
            verdict: c.verdict,
            reason: c.reason.clone(),
            sign_flips: c.sign_flips,
            wall_ms: c.wall_ms,
        }
    }
}
