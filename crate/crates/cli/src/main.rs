use std::collections::BTreeSet;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cmprime::cert::CertRecord;
use cmprime::log::{self, LogWriter};
use cmprime::ops;
use cmprime::params::{reference_modulus, ParamFile};
use cmprime_core::prover::{check_supported, Backend, Prover, SequenceParams};
use cmprime_core::Error;

/// Deterministic primality proofs for the class-number-three CM sequences F_k.
#[derive(Parser)]
#[command(name = "cmprime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the curve and condition table of a shipped case.
    Derive {
        #[arg(long = "case", value_parser = clap::value_parser!(u8).range(1..=2))]
        case_id: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the admissible residues of a parameter file.
    Conditions {
        #[arg(long)]
        params: PathBuf,
    },
    /// Decide one F_k (exit 0 prime, 1 composite, 2 unsupported k).
    Prove {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        backend: Backend,
    },
    /// Prove every admissible k in a range, logging each result.
    Scan {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Append to this log, skipping k already recorded in it.
        #[arg(long, conflicts_with = "log")]
        resume: Option<PathBuf>,
        /// Write a fresh log here (default: standard output).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        backend: Backend,
    },
    /// Compare the prover with Miller-Rabin on every admissible k ≤ max-k.
    Crosscheck {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        max_k: u64,
        #[arg(long, default_value_t = 64)]
        rounds: u32,
    },
}

fn load(path: &PathBuf) -> Result<SequenceParams> {
    Ok(ParamFile::load(path)?.1)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Derive { case_id, out } => {
            let params = SequenceParams::derive(case_id).context("derivation failed")?;
            let doc = ParamFile::from_params(&params);
            std::fs::write(&out, doc.to_json()).with_context(|| format!("writing {}", out.display()))?;
            let m = params.table.modulus;
            match reference_modulus(case_id) {
                Some(r) => eprintln!("case {case_id}: condition modulus {m} (reference {r})"),
                None => eprintln!("case {case_id}: condition modulus {m}"),
            }
            Ok(0)
        }
        Command::Conditions { params } => {
            let (doc, p) = ParamFile::load(&params)?;
            let t = &p.table;
            println!("modulus {}", t.modulus);
            if let Some(r) = doc.provenance.reference_modulus {
                println!("reference modulus {r}");
            }
            let res: Vec<String> = t.residues.iter().map(u64::to_string).collect();
            println!("residues {}", res.join(" "));
            let ex: Vec<String> = t.exceptions.iter().map(u64::to_string).collect();
            println!("exceptions {}", ex.join(" "));
            println!("t1 modulus {} ({} residues)", t.t1.modulus, t.t1.residues.len());
            println!("t2 modulus {} ({} residues)", t.t2.modulus, t.t2.residues.len());
            Ok(0)
        }
        Command::Prove { params, k, cert, backend } => {
            let p = load(&params)?;
            match check_supported(&p, k) {
                Err(Error::UnsupportedK(_)) => {
                    eprintln!("k = {k} is not supported by this parameter file");
                    return Ok(2);
                }
                Err(e) => return Err(e.into()),
                Ok(()) => {}
            }
            let c = Prover::new(&p.case, &p.curve, backend).run(k)?;
            let json = serde_json::to_string(&CertRecord::from(&c))?;
            println!("{json}");
            if let Some(path) = cert {
                std::fs::write(&path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if c.verdict { 0 } else { 1 })
        }
        Command::Scan {
            params,
            min,
            max,
            jobs,
            resume,
            log: log_path,
            backend,
        } => {
            let p = load(&params)?;
            let (writer, done) = match (&resume, &log_path) {
                (Some(path), _) => {
                    let (w, lines) = LogWriter::resume(path)?;
                    let done: BTreeSet<u64> = log::by_k(&lines)?.into_keys().collect();
                    (w, done)
                }
                (None, Some(path)) => (LogWriter::create(path)?, BTreeSet::new()),
                (None, None) => (LogWriter::new(Box::new(BufWriter::new(std::io::stdout()))), BTreeSet::new()),
            };
            let s = ops::scan(&p, min, max, jobs, backend, &done, writer)?;
            let primes: Vec<String> = s.primes.iter().map(u64::to_string).collect();
            eprintln!(
                "primes [{}]; {} composite, {} unsupported, {} errors, {} already logged",
                primes.join(", "),
                s.composite,
                s.unsupported,
                s.errors,
                s.skipped
            );
            Ok(0)
        }
        Command::Crosscheck { params, max_k, rounds } => {
            let p = load(&params)?;
            let r = ops::crosscheck(&p, max_k, rounds, Backend::Auto)?;
            println!("checked {} values of k", r.checked.len());
            let primes: Vec<String> = r.primes.iter().map(u64::to_string).collect();
            println!("primes [{}]", primes.join(", "));
            for m in &r.mismatches {
                println!("mismatch at k = {}: prover {}, miller-rabin {}", m.k, m.prover, m.miller_rabin);
            }
            println!("{} mismatches", r.mismatches.len());
            Ok(if r.mismatches.is_empty() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    // usage errors must not look like the "unsupported k" status
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
