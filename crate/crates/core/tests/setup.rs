use std::sync::OnceLock;

use cmprime_core::arith::is_prime_u64;
use cmprime_core::cmsetup::{degree_one_prime, derive_with_seed};
use cmprime_core::conditions::compute_t0;
use cmprime_core::hfield::{s_k, HField, SymbolEngine};
use cmprime_core::prover::SequenceParams;
use cmprime_core::qfield::Case;

fn params(id: u8) -> &'static SequenceParams {
    static P: [OnceLock<SequenceParams>; 2] = [OnceLock::new(), OnceLock::new()];
    P[id as usize - 1].get_or_init(|| SequenceParams::derive(id).unwrap())
}

fn split_primes(case: &Case, count: usize) -> Vec<u64> {
    let f = HField::of(case);
    (100u64..)
        .filter(|&p| is_prime_u64(p) && degree_one_prime(f, p).is_ok())
        .take(count)
        .collect()
}

#[test]
fn derivation_is_seed_independent() {
    for id in [1, 2] {
        let case = Case::shipped(id).unwrap();
        let base = &params(id).curve;
        for seed in [1, 7, 0xdead_beef] {
            let other = derive_with_seed(&case, seed).unwrap();
            assert_eq!(&other, base, "case {id} seed {seed}");
            assert_eq!(other.gamma3, base.gamma3);
        }
    }
}

#[test]
fn curve_data_validates() {
    for id in [1, 2] {
        let p = params(id);
        p.curve.validate(&p.case).unwrap();
    }
}

#[test]
fn dual_isogeny_composes_to_doubling() {
    for id in [1, 2] {
        let p = params(id);
        for q in split_primes(&p.case, 3) {
            p.curve.check_dual_composition(&p.case, q, 20, q).unwrap();
        }
    }
}

#[test]
fn frobenius_trace_matches_norm_form() {
    for id in [1, 2] {
        let p = params(id);
        let d = p.case.d;
        for q in split_primes(&p.case, 3) {
            let (order, sign) = p.curve.frobenius_trace_at(&p.case, q).unwrap();
            assert!(sign == 1 || sign == -1);
            let t = q as i64 + 1 - order as i64;
            // 4q = t² − D·v² for some integer v
            let rest = 4 * q as i64 - t * t;
            assert!(rest > 0 && rest % -d == 0, "case {id} prime {q}");
            let v2 = rest / -d;
            let v = (v2 as f64).sqrt().round() as i64;
            assert_eq!(v * v, v2, "case {id} prime {q}");
        }
    }
}

#[test]
fn tables_agree_with_symbols_over_three_periods() {
    for id in [1, 2] {
        let p = params(id);
        let t = &p.table;
        let g = SymbolEngine::new(&p.case, &p.curve.gamma3_times_six()).unwrap();
        let f = SymbolEngine::new(&p.case, &p.curve.disc_f).unwrap();
        for k in 1..=3 * t.modulus {
            let s1 = g.s_k(k) * p.case.epsilon_k(k);
            let s2 = f.s_k(k);
            assert_eq!(t.t1.contains(k), s1 == 1, "case {id} k {k}");
            assert_eq!(t.t2.contains(k), s2 == -1 || s2 == 0, "case {id} k {k}");
            assert_eq!(t.admissible(k), t.t1.contains(k) && t.t2.contains(k) && !t.exceptions.contains(&k));
        }
    }
}

#[test]
fn engine_matches_direct_symbol() {
    for id in [1, 2] {
        let p = params(id);
        for a in [p.curve.gamma3_times_six(), p.curve.disc_f.clone()] {
            let e = SymbolEngine::new(&p.case, &a).unwrap();
            for k in 2..40 {
                assert_eq!(e.s_k(k), s_k(&p.case, &a, k).unwrap(), "case {id} k {k}");
            }
        }
    }
}

#[test]
fn known_primes_are_admissible() {
    assert_eq!(params(1).table.modulus, 1320);
    assert_eq!(params(1).table.residues.len(), 295);
    for k in [100, 120, 313] {
        assert!(params(1).table.admissible(k), "case 1 k {k}");
    }
    assert!(params(2).table.admissible(23));
}

#[test]
fn no_exceptional_k() {
    for id in [1, 2] {
        let p = params(id);
        assert!(compute_t0(&p.case, &p.curve).unwrap().is_empty());
        assert!(p.table.exceptions.is_empty());
    }
}
