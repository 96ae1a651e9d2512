//! Scans and cross-checks over ranges of k.

use std::collections::BTreeSet;
use std::sync::Mutex;

use anyhow::{Context, Result};
use cmprime_core::arith::miller_rabin;
use cmprime_core::prover::{check_supported, Backend, Prover, SequenceParams};
use cmprime_core::Error;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::cert::CertRecord;
use crate::log::{Entry, LogWriter, Status};

/// Runs the gated prover for one k and turns the outcome into a log entry.
pub fn prove_entry(params: &SequenceParams, k: u64, backend: Backend) -> Entry {
    if let Err(e) = check_supported(params, k) {
        let status = if matches!(e, Error::UnsupportedK(_)) { Status::Unsupported } else { Status::Error };
        return Entry {
            k,
            status,
            reason: Some(e.to_string()),
            cert: None,
        };
    }
    match Prover::new(&params.case, &params.curve, backend).run(k) {
        Ok(c) => Entry {
            k,
            status: if c.verdict { Status::Prime } else { Status::Composite },
            reason: c.reason.clone(),
            cert: Some(CertRecord::from(&c)),
        },
        Err(e) => Entry {
            k,
            status: Status::Error,
            reason: Some(e.to_string()),
            cert: None,
        },
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub primes: BTreeSet<u64>,
    pub composite: usize,
    pub unsupported: usize,
    pub errors: usize,
    pub skipped: usize,
}

/// Proves every k in [min, max] not in `done` on `jobs` workers, appending
/// one entry per k as results arrive.
pub fn scan(
    params: &SequenceParams,
    min: u64,
    max: u64,
    jobs: usize,
    backend: Backend,
    done: &BTreeSet<u64>,
    writer: LogWriter,
) -> Result<ScanSummary> {
    anyhow::ensure!(min >= 2, "scans start at k = 2");
    let todo: Vec<u64> = (min..=max).filter(|k| !done.contains(k)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building the worker pool")?;
    let state = Mutex::new((writer, ScanSummary {
        skipped: (min..=max).count() - todo.len(),
        ..Default::default()
    }));
    pool.install(|| {
        todo.par_iter().with_max_len(1).try_for_each(|&k| -> Result<()> {
            let e = prove_entry(params, k, backend);
            let mut guard = state.lock().expect("log writer poisoned");
            let (w, s) = &mut *guard;
            match e.status {
                Status::Prime => {
                    s.primes.insert(k);
                }
                Status::Composite => s.composite += 1,
                Status::Unsupported => s.unsupported += 1,
                Status::Error => s.errors += 1,
            }
            w.append(e)?;
            Ok(())
        })
    })?;
    Ok(state.into_inner().expect("log writer poisoned").1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub k: u64,
    pub prover: bool,
    pub miller_rabin: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossReport {
    pub checked: Vec<u64>,
    pub primes: BTreeSet<u64>,
    pub mismatches: Vec<Mismatch>,
}

/// Compares the prover with Miller-Rabin on every supported k ≤ max_k.
pub fn crosscheck(params: &SequenceParams, max_k: u64, rounds: u32, backend: Backend) -> Result<CrossReport> {
    let ks: Vec<u64> = (2..=max_k).filter(|&k| check_supported(params, k).is_ok()).collect();
    let results: Vec<(u64, bool, bool)> = ks
        .par_iter()
        .with_max_len(1)
        .map(|&k| -> Result<(u64, bool, bool)> {
            let c = Prover::new(&params.case, &params.curve, backend).run(k)?;
            let n: BigUint = c.f_k.clone();
            Ok((k, c.verdict, miller_rabin(&n, rounds)))
        })
        .collect::<Result<_>>()?;
    let mut report = CrossReport {
        checked: ks,
        ..Default::default()
    };
    for (k, p, m) in results {
        if p {
            report.primes.insert(k);
        }
        if p != m {
            report.mismatches.push(Mismatch {
                k,
                prover: p,
                miller_rabin: m,
            });
        }
    }
    Ok(report)
}
