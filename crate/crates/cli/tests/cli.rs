use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use cmprime::cert::CertRecord;
use cmprime::log::{self, LogWriter, Status};
use cmprime::ops;
use cmprime::params::ParamFile;
use cmprime::replay::replay;
use cmprime_core::prover::{Backend, SequenceParams};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmprime"))
}

struct Fixture {
    dir: TempDir,
    params: [SequenceParams; 2],
}

impl Fixture {
    fn path(&self, case_id: u8) -> PathBuf {
        self.dir.path().join(format!("case{case_id}.json"))
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let params = [1u8, 2].map(|id| {
            let p = SequenceParams::derive(id).unwrap();
            std::fs::write(dir.path().join(format!("case{id}.json")), ParamFile::from_params(&p).to_json()).unwrap();
            p
        });
        Fixture { dir, params }
    })
}

fn scan_to(path: &Path, p: &SequenceParams, max: u64, jobs: usize) -> BTreeSet<u64> {
    let w = LogWriter::create(path).unwrap();
    ops::scan(p, 2, max, jobs, Backend::Auto, &BTreeSet::new(), w).unwrap().primes
}

#[test]
fn derive_is_deterministic_and_loads_back() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let st = bin().args(["derive", "--case", "2", "--out"]).arg(out).status().unwrap();
        assert!(st.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let (doc, params) = ParamFile::load(&a).unwrap();
    assert_eq!(params, fixture().params[1]);
    assert_eq!(ParamFile::from_params(&params), doc);
    assert_eq!(doc.to_json().into_bytes(), bytes);
}

#[test]
fn derive_rejects_unknown_case() {
    let dir = TempDir::new().unwrap();
    let st = bin().args(["derive", "--case", "3", "--out"]).arg(dir.path().join("x.json")).status().unwrap();
    assert_eq!(st.code(), Some(3));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
}

#[test]
fn loader_rejects_tampered_curves() {
    let f = fixture();
    let mut doc = ParamFile::from_params(&f.params[0]);
    doc.curve.beta[0] = format!("{}1", doc.curve.beta[0]);
    assert!(doc.to_params().is_err());

    let mut doc = ParamFile::from_params(&f.params[0]);
    doc.conditions.residues.pop();
    assert!(doc.to_params().is_err());

    let mut doc = ParamFile::from_params(&f.params[0]);
    doc.version = 99;
    assert!(doc.to_params().is_err());

    let mut doc = ParamFile::from_params(&f.params[0]);
    doc.curve.j[1] = "2/4".into();
    assert!(doc.to_params().is_err());
}

#[test]
fn conditions_prints_the_table() {
    let out = bin().args(["conditions", "--params"]).arg(fixture().path(1)).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("modulus 1320\nreference modulus 1320\n"));
    let residues = text.lines().find(|l| l.starts_with("residues ")).unwrap();
    assert_eq!(residues.split_whitespace().count() - 1, 295);
}

#[test]
fn prove_exit_codes() {
    let f = fixture();
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cert.json");
    let out = bin()
        .args(["prove", "--params"])
        .arg(f.path(1))
        .args(["--k", "100", "--cert"])
        .arg(&cert)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rec: CertRecord = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    assert_eq!(serde_json::from_slice::<CertRecord>(&out.stdout).unwrap(), rec);
    assert!(rec.verdict && rec.k == 100);
    assert!(replay(&f.params[0], &rec).unwrap());

    let code = |k: &str| bin().args(["prove", "--params"]).arg(f.path(1)).args(["--k", k]).output().unwrap().status.code();
    assert_eq!(code("102"), Some(1));
    assert_eq!(code("101"), Some(2));
    assert_eq!(code("1"), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format\": \"cmprime-params\"}").unwrap();
    let out = bin().args(["prove", "--params"]).arg(&bad).args(["--k", "100"]).output().unwrap();
    assert!(out.status.code().unwrap() > 2);
    assert!(!out.stderr.is_empty());
    let missing = bin().args(["prove", "--params"]).arg(dir.path().join("none.json")).args(["--k", "100"]).status().unwrap();
    assert!(missing.code().unwrap() > 2);
}

#[test]
fn prove_case_two_k_23() {
    let f = fixture();
    let st = bin().args(["prove", "--params"]).arg(f.path(2)).args(["--k", "23"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}

#[test]
fn parallel_scans_agree() {
    let f = fixture();
    let dir = TempDir::new().unwrap();
    let mut maps = Vec::new();
    for jobs in [1usize, 4, 16] {
        let path = dir.path().join(format!("scan{jobs}.log"));
        assert_eq!(scan_to(&path, &f.params[0], 200, jobs), BTreeSet::from([100, 120]));
        maps.push(log::by_k(&log::read(&path).unwrap()).unwrap());
    }
    for m in &maps[1..] {
        assert_eq!(m.len(), maps[0].len());
        for (k, e) in m {
            let base = &maps[0][k];
            assert_eq!(e.status, base.status, "k = {k}");
            match (&e.cert, &base.cert) {
                (Some(a), Some(b)) => assert!(a.same_run(b), "k = {k}"),
                (None, None) => assert_eq!(e.reason, base.reason),
                _ => panic!("k = {k}"),
            }
        }
    }
}

#[test]
fn resume_after_interruption_completes_the_log() {
    let f = fixture();
    let dir = TempDir::new().unwrap();
    let full = dir.path().join("full.log");
    scan_to(&full, &f.params[0], 160, 1);
    let reference = log::by_k(&log::read(&full).unwrap()).unwrap();

    // keep the first 40 records and half of the next, as a killed writer would
    let text = std::fs::read_to_string(&full).unwrap();
    let mut cut: usize = text.split_inclusive('\n').take(40).map(str::len).sum();
    cut += text[cut..].find('\n').unwrap() / 2;
    let partial = dir.path().join("partial.log");
    std::fs::write(&partial, &text[..cut]).unwrap();

    let st = bin()
        .args(["scan", "--params"])
        .arg(f.path(1))
        .args(["--min", "2", "--max", "160", "--jobs", "4", "--resume"])
        .arg(&partial)
        .status()
        .unwrap();
    assert!(st.success());
    let lines = log::read(&partial).unwrap();
    assert_eq!(lines.len(), 159);
    let resumed = log::by_k(&lines).unwrap();
    assert_eq!(resumed.keys().collect::<Vec<_>>(), reference.keys().collect::<Vec<_>>());
    for (k, e) in &resumed {
        assert_eq!(e.status, reference[k].status, "k = {k}");
    }
    assert_eq!(log::primes(&lines).unwrap(), BTreeSet::from([100, 120]));

    // a second resume has nothing left to do
    let st = bin()
        .args(["scan", "--params"])
        .arg(f.path(1))
        .args(["--min", "2", "--max", "160", "--resume"])
        .arg(&partial)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(log::read(&partial).unwrap().len(), 159);
}

#[test]
fn scan_writes_to_stdout_without_a_log() {
    let out = bin()
        .args(["scan", "--params"])
        .arg(fixture().path(2))
        .args(["--min", "20", "--max", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let (lines, _) = log::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(lines.len(), 11);
    assert_eq!(log::primes(&lines).unwrap(), BTreeSet::from([23]));
    assert!(lines.iter().any(|l| l.status == Status::Unsupported && l.reason.is_some()));
}

#[test]
fn tampering_breaks_the_digest_chain() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.log");
    scan_to(&path, &fixture().params[0], 40, 1);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(log::parse(&text).is_ok());
    let forged = text.replacen("\"status\":\"composite\"", "\"status\":\"prime\"", 1);
    assert_ne!(forged, text);
    assert!(log::parse(&forged).is_err());
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(3, 4);
    assert!(log::parse(&(lines.join("\n") + "\n")).is_err());
}

#[test]
fn conflicting_duplicates_are_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.log");
    let p = &fixture().params[0];
    let mut w = LogWriter::create(&path).unwrap();
    let e = ops::prove_entry(p, 100, Backend::Auto);
    w.append(e.clone()).unwrap();
    w.append(e.clone()).unwrap();
    let mut bad = e;
    bad.status = Status::Composite;
    w.append(bad).unwrap();
    drop(w);
    let lines = log::read(&path).unwrap();
    assert!(log::by_k(&lines[..2]).is_ok());
    assert!(log::by_k(&lines).is_err());
}

#[test]
fn every_certificate_replays() {
    let f = fixture();
    let dir = TempDir::new().unwrap();
    for (i, p) in f.params.iter().enumerate() {
        let path = dir.path().join(format!("r{i}.log"));
        scan_to(&path, p, 400, 1);
        let mut reasons = BTreeSet::new();
        for l in log::read(&path).unwrap() {
            if let Some(c) = &l.cert {
                assert_eq!(replay(p, c).unwrap(), c.verdict, "case {} k = {}", i + 1, l.k);
                reasons.insert(c.reason.clone());
            }
        }
        assert!(reasons.len() >= 2);
    }
}

#[test]
fn replay_catches_altered_certificates() {
    let p = &fixture().params[0];
    let e = ops::prove_entry(p, 120, Backend::Auto);
    let c = e.cert.unwrap();
    assert!(replay(p, &c).unwrap());

    let mut bad = c.clone();
    let q = bad.q.as_mut().unwrap();
    q[0] = (q[0].parse::<num_bigint::BigUint>().unwrap() + 1u32).to_string();
    assert!(replay(p, &bad).is_err());

    let mut bad = c.clone();
    bad.verdict = false;
    assert!(replay(p, &bad).is_err());

    let mut bad = c.clone();
    bad.doublings -= 1;
    assert!(replay(p, &bad).is_err());

    let mut bad = c;
    bad.k = 100;
    assert!(replay(p, &bad).is_err());
}

#[test]
fn crosscheck_reports_no_mismatches() {
    let out = bin()
        .args(["crosscheck", "--params"])
        .arg(fixture().path(1))
        .args(["--max-k", "130", "--rounds", "20"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("primes [100, 120]"));
    assert!(text.ends_with("0 mismatches\n"));
}
