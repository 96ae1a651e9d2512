//! The append-only result log: one JSON record per line, each carrying the
//! SHA-256 digest of its predecessor's digest and its own body.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cert::CertRecord;

pub const GENESIS: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Prime,
    Composite,
    Unsupported,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub k: u64,
    pub status: Status,
    pub reason: Option<String>,
    pub cert: Option<CertRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub seq: u64,
    pub k: u64,
    pub status: Status,
    pub reason: Option<String>,
    pub cert: Option<CertRecord>,
    pub prev: String,
    pub digest: String,
}

impl Line {
    pub fn entry(&self) -> Entry {
        Entry {
            k: self.k,
            status: self.status,
            reason: self.reason.clone(),
            cert: self.cert.clone(),
        }
    }
}

fn digest(prev: &str, seq: u64, e: &Entry) -> String {
    let body = serde_json::to_string(&(seq, e)).expect("serializable");
    let mut h = Sha256::new();
    h.update(prev.as_bytes());
    h.update(b"\n");
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

/// Parses and verifies a log. A final line without a newline is the trace
/// of an interrupted write and is ignored; `valid_len` is the byte length
/// of the verified prefix.
pub fn parse(text: &str) -> Result<(Vec<Line>, usize)> {
    let mut lines = Vec::new();
    let mut prev = GENESIS.to_string();
    let mut pos = 0;
    for raw in text.split_inclusive('\n') {
        if !raw.ends_with('\n') {
            break;
        }
        let line: Line = serde_json::from_str(raw.trim_end()).with_context(|| format!("log line {}", lines.len() + 1))?;
        ensure!(line.seq == lines.len() as u64, "log line {} has sequence number {}", lines.len() + 1, line.seq);
        ensure!(line.prev == prev, "log line {} breaks the digest chain", line.seq + 1);
        ensure!(line.digest == digest(&prev, line.seq, &line.entry()), "log line {} has a bad digest", line.seq + 1);
        prev = line.digest.clone();
        pos += raw.len();
        lines.push(line);
    }
    Ok((lines, pos))
}

pub fn read(path: &Path) -> Result<Vec<Line>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse(&text)?.0)
}

/// Final entry per k; duplicates must agree on everything but timing.
pub fn by_k(lines: &[Line]) -> Result<BTreeMap<u64, Entry>> {
    let mut out: BTreeMap<u64, Entry> = BTreeMap::new();
    for l in lines {
        let e = l.entry();
        if let Some(old) = out.get(&l.k) {
            let agree = old.status == e.status
                && match (&old.cert, &e.cert) {
                    (Some(a), Some(b)) => a.same_run(b),
                    (None, None) => true,
                    _ => false,
                };
            if !agree {
                bail!("conflicting entries for k = {}", l.k);
            }
        }
        out.insert(l.k, e);
    }
    Ok(out)
}

pub fn primes(lines: &[Line]) -> Result<BTreeSet<u64>> {
    Ok(by_k(lines)?
        .into_iter()
        .filter(|(_, e)| e.status == Status::Prime)
        .map(|(k, _)| k)
        .collect())
}

/// Appends entries, extending the digest chain.
pub struct LogWriter {
    out: Box<dyn Write + Send>,
    seq: u64,
    prev: String,
}

impl LogWriter {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        LogWriter {
            out,
            seq: 0,
            prev: GENESIS.into(),
        }
    }

    /// Opens `path` for appending after verifying it; a torn last line is
    /// cut off. Returns the existing lines as well.
    pub fn resume(path: &Path) -> Result<(Self, Vec<Line>)> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        let (lines, valid) = parse(&text)?;
        let file = OpenOptions::new().create(true).write(true).truncate(false).open(path)?;
        file.set_len(valid as u64)?;
        drop(file);
        let file = OpenOptions::new().append(true).open(path)?;
        let mut w = LogWriter::new(Box::new(BufWriter::new(file)));
        if let Some(last) = lines.last() {
            w.seq = last.seq + 1;
            w.prev = last.digest.clone();
        }
        Ok((w, lines))
    }

    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(LogWriter::new(Box::new(BufWriter::new(file))))
    }

    pub fn append(&mut self, e: Entry) -> Result<Line> {
        let d = digest(&self.prev, self.seq, &e);
        let line = Line {
            seq: self.seq,
            k: e.k,
            status: e.status,
            reason: e.reason,
            cert: e.cert,
            prev: std::mem::replace(&mut self.prev, d.clone()),
            digest: d,
        };
        let mut s = serde_json::to_string(&line)?;
        s.push('\n');
        self.out.write_all(s.as_bytes())?;
        self.out.flush()?;
        self.seq += 1;
        Ok(line)
    }
}
