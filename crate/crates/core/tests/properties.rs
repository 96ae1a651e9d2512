use cmprime_core::cmsetup::fp::FpCurve;
use cmprime_core::Error;
use cmprime_core::hfield::{s_k, HElem, HField, KElem, TwoAdicQuotient};
use cmprime_core::prover::{Backend, Curve, ModCtx};
use cmprime_core::qfield::{Case, QuadInt, TwoPrime};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

fn case(id: u8) -> Case {
    Case::shipped(id).unwrap()
}

fn quad(d: i64) -> impl Strategy<Value = QuadInt> {
    (-10_000i64..10_000, -10_000i64..10_000).prop_map(move |(a, b)| {
        let a = if (a - b) % 2 == 0 { a } else { a + 1 };
        QuadInt::new(a, b, d).unwrap()
    })
}

fn kelem() -> impl Strategy<Value = KElem> {
    (-50i64..50, -50i64..50, 1i64..5, 1i64..5).prop_map(|(x, y, dx, dy)| KElem {
        x: BigRational::new(BigInt::from(x), BigInt::from(dx)),
        y: BigRational::new(BigInt::from(y), BigInt::from(dy)),
    })
}

fn helem(f: HField) -> impl Strategy<Value = HElem> {
    [kelem(), kelem(), kelem()].prop_map(move |c| HElem::new(f, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_norm_is_multiplicative((a, b) in prop::sample::select(vec![-23i64, -31]).prop_flat_map(|d| (quad(d), quad(d)))) {
        prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        prop_assert_eq!(&a * &a.conj(), QuadInt::from_int(a.norm(), a.d));
    }

    #[test]
    fn h_is_a_commutative_ring(a in helem(HField::of(&case(1))), b in helem(HField::of(&case(1))), c in helem(HField::of(&case(1)))) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        prop_assert_eq!(&a * &HElem::one(a.field), a.clone());
        prop_assert_eq!((&a * &b).norm_hk(), a.norm_hk().mul(&b.norm_hk(), a.field.d));
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn case_two_ring_and_norm(a in helem(HField::of(&case(2))), b in helem(HField::of(&case(2)))) {
        prop_assert_eq!((&a * &b).norm_hq(), a.norm_hq() * b.norm_hq());
        prop_assert_eq!(a.square(), &a * &a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hilbert_symbol_is_symmetric_and_bimultiplicative(
        id in 1u8..=2,
        lambda_bar in any::<bool>(),
        raw in proptest::array::uniform4(proptest::array::uniform6(-6i64..7)),
    ) {
        let c = case(id);
        let f = HField::of(&c);
        let prime = if lambda_bar { TwoPrime::LambdaBar } else { TwoPrime::Lambda };
        let q = TwoAdicQuotient::new(&c, prime);
        let [a1, a2, b, x] = raw.map(|v| HElem::from_coords(f, v.map(|x| BigRational::from_integer(BigInt::from(x)))));
        prop_assume!(!a1.is_zero() && !a2.is_zero() && !x.is_zero());
        prop_assume!(q.ord(&b).unwrap() == 0);
        let h = |a: &HElem, b: &HElem| q.hilbert_symbol(a, b).unwrap();
        let prod = &a1 * &a2;
        prop_assert_eq!(h(&prod, &b), h(&a1, &b) * h(&a2, &b));
        prop_assert_eq!(h(&(&a1 * &x.square()), &b), h(&a1, &b));
        if q.ord(&a1).unwrap() == 0 {
            prop_assert_eq!(h(&a1, &b), h(&b, &a1));
        }
        prop_assert_eq!(h(&b.square(), &b), 1);
    }

    #[test]
    fn symbol_ignores_square_factors(
        id in 1u8..=2,
        raw in proptest::array::uniform2(proptest::array::uniform6(-6i64..7)),
        k in 2u64..200,
    ) {
        let c = case(id);
        let f = HField::of(&c);
        let [a, x] = raw.map(|v| HElem::from_coords(f, v.map(|x| BigRational::from_integer(BigInt::from(x)))));
        prop_assume!(!a.is_zero() && !x.is_zero());
        // large prime factors of the norm can exceed the period budget
        let (s, t) = match (s_k(&c, &a, k), s_k(&c, &(&a * &x.square()), k)) {
            (Err(Error::Budget { .. }), _) | (_, Err(Error::Budget { .. })) => return Ok(()),
            (s, t) => (s.unwrap(), t.unwrap()),
        };
        // a factor shared with p_k makes the symbol vanish
        if s != 0 && t != 0 {
            prop_assert_eq!(s, t);
        }
    }
}

fn odd_modulus() -> impl Strategy<Value = BigUint> {
    (1usize..9, any::<u64>()).prop_map(|(limbs, seed)| {
        let mut words = Vec::new();
        let mut s = seed | 1;
        for _ in 0..2 * limbs {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            words.push(s as u32);
        }
        let n = BigUint::from_slice(&words) | BigUint::from(1u32);
        if n < BigUint::from(3u32) { BigUint::from(1_000_003u32) } else { n }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modular_arithmetic_matches_bigint(n in odd_modulus(), x in any::<[u64; 4]>(), y in any::<[u64; 4]>(), e in any::<u32>()) {
        let to_big = |v: [u64; 4]| BigUint::from_slice(&v.iter().flat_map(|&w| [w as u32, (w >> 32) as u32]).collect::<Vec<_>>()) % &n;
        let (a, b) = (to_big(x), to_big(y));
        for backend in [Backend::Limb, Backend::Ntt] {
            let c = ModCtx::new(&n, backend).unwrap();
            let (ea, eb) = (c.from_big(&a), c.from_big(&b));
            prop_assert_eq!(c.to_big(&c.mul(&ea, &eb)), (&a * &b) % &n);
            prop_assert_eq!(c.to_big(&c.sqr(&ea)), (&a * &a) % &n);
            prop_assert_eq!(c.to_big(&c.add(&ea, &eb)), (&a + &b) % &n);
            prop_assert_eq!(c.to_big(&c.sub(&ea, &eb)), (&a + &n - &b) % &n);
            prop_assert_eq!(c.to_big(&c.neg(&ea)), (&n - &a) % &n);
            let e = BigUint::from(e);
            prop_assert_eq!(c.to_big(&c.pow(&ea, &e)), a.modpow(&e, &n));
        }
    }

    #[test]
    fn ladder_matches_affine_arithmetic(
        p in prop::sample::select(vec![1009u64, 10007, 65537, 1_000_003]),
        a in 0u64..1000,
        b in 1u64..1000,
        n in 1u64..100_000,
        m in 1u64..100_000,
        seed in any::<u64>(),
    ) {
        let fc = FpCurve::new(p, a % p, b % p);
        prop_assume!(!fc.discriminant_is_zero());
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let pt = fc.random_point(&mut rng);
        prop_assume!(pt.is_some());
        let ctx = ModCtx::new(&BigUint::from(p), Backend::Limb).unwrap();
        let c = Curve::new(&ctx, &BigUint::from(a % p), &BigUint::from(b % p));
        let (x, y) = pt.unwrap();
        let g = c.affine(&BigUint::from(x), &BigUint::from(y));
        let affine = |q: &cmprime_core::prover::ProjPoint| {
            let [x, y, z] = c.coords(q);
            if z == BigUint::from(0u32) {
                return None;
            }
            let zi = z.modpow(&BigUint::from(p - 2), &BigUint::from(p));
            Some((((x * &zi) % p).try_into().unwrap(), ((y * &zi) % p).try_into().unwrap()))
        };
        let gn = c.mul(&g, &BigUint::from(n));
        prop_assert!(c.on_curve(&gn));
        prop_assert_eq!(affine(&gn), fc.mul(&pt, &BigUint::from(n)));
        let gm = c.mul(&g, &BigUint::from(m));
        let sum = fc.add(&affine(&gn), &affine(&gm));
        prop_assert_eq!(affine(&c.mul(&g, &BigUint::from(n + m))), sum);
        prop_assert_eq!(affine(&c.double_n(&gn, 3)), fc.mul(&pt, &BigUint::from(8 * n)));
    }
}
