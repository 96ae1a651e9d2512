//! Montgomery arithmetic modulo an odd N, with a schoolbook limb backend
//! and a transform backend for large moduli.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::ntt::{self, Ntt};
use crate::error::{Error, Result};

/// Limb count from which `Backend::Auto` switches to transforms.
pub const NTT_THRESHOLD_LIMBS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Coarsely integrated operand scanning over 64-bit limbs.
    Limb,
    /// Transform-based products with Montgomery reduction.
    Ntt,
    /// Limb below `NTT_THRESHOLD_LIMBS`, transforms above.
    Auto,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Limb => "limb",
            Backend::Ntt => "ntt",
            Backend::Auto => "auto",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limb" => Ok(Backend::Limb),
            "ntt" => Ok(Backend::Ntt),
            "auto" => Ok(Backend::Auto),
            _ => Err(Error::Parameter(format!("unknown backend {s}"))),
        }
    }
}

/// A residue in Montgomery form, as `limbs` little-endian words.
pub type Elem = Vec<u64>;

#[derive(Clone, Debug)]
struct NttMont {
    t: Ntt,
    n_hat: Vec<u64>,
    nprime_hat: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct ModCtx {
    n_big: BigUint,
    n: Vec<u64>,
    limbs: usize,
    /// −N⁻¹ mod 2^64.
    n0inv: u64,
    r2: Elem,
    one: Elem,
    backend: Backend,
    ntt: Option<NttMont>,
    pub inv2: Elem,
}

fn inv_word(n0: u64) -> u64 {
    // Newton iteration for n0⁻¹ mod 2^64
    let mut x: u64 = 1;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(n0.wrapping_mul(x)));
    }
    x.wrapping_neg()
}

fn to_limbs(x: &BigUint, n: usize) -> Vec<u64> {
    let mut v = x.to_u64_digits();
    v.resize(n, 0);
    v
}

fn from_limbs(v: &[u64]) -> BigUint {
    let words: Vec<u32> = v.iter().flat_map(|&x| [x as u32, (x >> 32) as u32]).collect();
    BigUint::from_slice(&words)
}

fn geq(a: &[u64], b: &[u64]) -> bool {
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

fn sub_in_place(a: &mut [u64], b: &[u64]) -> bool {
    let mut borrow = false;
    for i in 0..a.len() {
        let (d1, b1) = a[i].overflowing_sub(b[i]);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        a[i] = d2;
        borrow = b1 || b2;
    }
    borrow
}

fn add_in_place(a: &mut [u64], b: &[u64]) -> bool {
    let mut carry = false;
    for i in 0..a.len() {
        let (s1, c1) = a[i].overflowing_add(b[i]);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        a[i] = s2;
        carry = c1 || c2;
    }
    carry
}

impl ModCtx {
    pub fn new(n: &BigUint, backend: Backend) -> Result<Self> {
        if n < &BigUint::from(3u32) || !n.bit(0) {
            return Err(Error::Precondition("modulus must be odd and at least 3".into()));
        }
        let limbs = n.to_u64_digits().len();
        let backend = match backend {
            Backend::Auto if limbs >= NTT_THRESHOLD_LIMBS => Backend::Ntt,
            Backend::Auto => Backend::Limb,
            b => b,
        };
        let nv = to_limbs(n, limbs);
        let r = BigUint::one() << (64 * limbs);
        let r_mod = &r % n;
        let r2 = (&r_mod * &r_mod) % n;
        let ntt = if backend == Backend::Ntt {
            let digits = ntt::digits_for_limbs(limbs);
            let log = (2 * digits).next_power_of_two().trailing_zeros().max(1);
            if log > ntt::MAX_LOG_LEN {
                return Err(Error::Precondition("modulus too large for the transform backend".into()));
            }
            let t = Ntt::new(log);
            // N' = −N⁻¹ mod R
            let nprime = (&r - mod_inv_pow2(n, limbs)) % &r;
            let n_hat = t.transform_limbs(&nv);
            let nprime_hat = t.transform_limbs(&to_limbs(&nprime, limbs));
            Some(NttMont { t, n_hat, nprime_hat })
        } else {
            None
        };
        let mut ctx = ModCtx {
            n_big: n.clone(),
            n0inv: inv_word(nv[0]),
            n: nv,
            limbs,
            r2: to_limbs(&r2, limbs),
            one: to_limbs(&r_mod, limbs),
            backend,
            ntt,
            inv2: vec![],
        };
        ctx.inv2 = ctx.from_big(&((n + 1u32) >> 1));
        Ok(ctx)
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n_big
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn limbs(&self) -> usize {
        self.limbs
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.limbs]
    }

    pub fn one(&self) -> Elem {
        self.one.clone()
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn from_big(&self, x: &BigUint) -> Elem {
        let v = to_limbs(&(x % &self.n_big), self.limbs);
        self.mul(&v, &self.r2)
    }

    pub fn from_u64(&self, x: u64) -> Elem {
        self.from_big(&BigUint::from(x))
    }

    pub fn to_big(&self, a: &Elem) -> BigUint {
        let mut one = vec![0; self.limbs];
        one[0] = 1;
        from_limbs(&self.mul(a, &one))
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut s = a.clone();
        let carry = add_in_place(&mut s, b);
        if carry || geq(&s, &self.n) {
            sub_in_place(&mut s, &self.n);
        }
        s
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let mut s = a.clone();
        if sub_in_place(&mut s, b) {
            add_in_place(&mut s, &self.n);
        }
        s
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        self.sub(&self.zero(), a)
    }

    pub fn dbl(&self, a: &Elem) -> Elem {
        self.add(a, a)
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match &self.ntt {
            Some(m) => self.mul_ntt(m, a, Some(b)),
            None => self.mul_cios(a, b),
        }
    }

    pub fn sqr(&self, a: &Elem) -> Elem {
        match &self.ntt {
            Some(m) => self.mul_ntt(m, a, None),
            None => self.mul_cios(a, a),
        }
    }

    fn mul_cios(&self, a: &[u64], b: &[u64]) -> Elem {
        let n = self.limbs;
        let mut t = vec![0u64; n + 2];
        for i in 0..n {
            let bi = b[i] as u128;
            let mut c: u128 = 0;
            for j in 0..n {
                let s = t[j] as u128 + a[j] as u128 * bi + c;
                t[j] = s as u64;
                c = s >> 64;
            }
            let s = t[n] as u128 + c;
            t[n] = s as u64;
            t[n + 1] = (s >> 64) as u64;
            let m = t[0].wrapping_mul(self.n0inv) as u128;
            let s = t[0] as u128 + m * self.n[0] as u128;
            let mut c = s >> 64;
            for j in 1..n {
                let s = t[j] as u128 + m * self.n[j] as u128 + c;
                t[j - 1] = s as u64;
                c = s >> 64;
            }
            let s = t[n] as u128 + c;
            t[n - 1] = s as u64;
            t[n] = t[n + 1] + (s >> 64) as u64;
        }
        let mut out = t[..n].to_vec();
        if t[n] != 0 || geq(&out, &self.n) {
            sub_in_place(&mut out, &self.n);
        }
        out
    }

    fn mul_ntt(&self, m: &NttMont, a: &[u64], b: Option<&[u64]>) -> Elem {
        let n = self.limbs;
        let mut x = vec![0u64; m.t.len];
        m.t.load(&mut x, a);
        let t = match b {
            Some(b) => {
                let mut y = vec![0u64; m.t.len];
                m.t.load(&mut y, b);
                m.t.multiply_into(&mut x, &y, 2 * n)
            }
            None => m.t.square_into(&mut x, 2 * n),
        };
        m.t.load(&mut x, &t[..n]);
        let q = m.t.multiply_into(&mut x, &m.nprime_hat, n);
        m.t.load(&mut x, &q);
        let qn = m.t.multiply_into(&mut x, &m.n_hat, 2 * n);
        let mut s = t;
        s.push(0);
        let mut qn = qn;
        qn.push(0);
        add_in_place(&mut s, &qn);
        let mut out = s[n..2 * n].to_vec();
        if s[2 * n] != 0 || geq(&out, &self.n) {
            sub_in_place(&mut out, &self.n);
        }
        out
    }

    /// a^e with a 4-bit fixed window.
    pub fn pow(&self, a: &Elem, e: &BigUint) -> Elem {
        if e.is_zero() {
            return self.one();
        }
        let mut table = vec![self.one(), a.clone()];
        for i in 2..16 {
            table.push(self.mul(&table[i - 1], a));
        }
        let bits = e.bits();
        let top = ((bits + 3) / 4) * 4;
        let mut acc = self.one();
        let mut first = true;
        let mut i = top;
        while i > 0 {
            i -= 4;
            let mut d = 0usize;
            for b in 0..4 {
                if e.bit(i + b) {
                    d |= 1 << b;
                }
            }
            if first {
                acc = table[d].clone();
                first = false;
            } else {
                for _ in 0..4 {
                    acc = self.sqr(&acc);
                }
                if d != 0 {
                    acc = self.mul(&acc, &table[d]);
                }
            }
        }
        acc
    }
}

/// N⁻¹ mod 2^(64·limbs) by Newton iteration.
fn mod_inv_pow2(n: &BigUint, limbs: usize) -> BigUint {
    let r_bits = 64 * limbs as u64;
    let mask = (BigUint::one() << r_bits) - 1u32;
    let r = &mask + 1u32;
    let two = BigUint::from(2u32);
    let mut x = BigUint::one();
    let mut prec = 1u64;
    while prec < r_bits {
        prec *= 2;
        // x ← x(2 − n·x)
        let nx = (n * &x) & &mask;
        let t = (&r + &two - nx) & &mask;
        x = (&x * t) & &mask;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use rand::SeedableRng;

    fn check_backend(bits: u64, backend: Backend) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(bits);
        let mut n = rng.gen_biguint(bits);
        n.set_bit(0, true);
        n.set_bit(bits - 1, true);
        let ctx = ModCtx::new(&n, backend).unwrap();
        for _ in 0..8 {
            let a = rng.gen_biguint_below(&n);
            let b = rng.gen_biguint_below(&n);
            let (ea, eb) = (ctx.from_big(&a), ctx.from_big(&b));
            assert_eq!(ctx.to_big(&ea), a);
            assert_eq!(ctx.to_big(&ctx.mul(&ea, &eb)), (&a * &b) % &n);
            assert_eq!(ctx.to_big(&ctx.sqr(&ea)), (&a * &a) % &n);
            assert_eq!(ctx.to_big(&ctx.add(&ea, &eb)), (&a + &b) % &n);
            assert_eq!(ctx.to_big(&ctx.sub(&ea, &eb)), ((&a + &n) - &b) % &n);
            let e = rng.gen_biguint(100);
            assert_eq!(ctx.to_big(&ctx.pow(&ea, &e)), a.modpow(&e, &n));
        }
        assert_eq!(ctx.to_big(&ctx.mul(&ctx.inv2, &ctx.from_u64(2))), BigUint::one());
    }

    #[test]
    fn limb_backend_matches_bigint() {
        for bits in [2, 5, 64, 65, 200, 1024, 3001] {
            check_backend(bits.max(3), Backend::Limb);
        }
    }

    #[test]
    fn ntt_backend_matches_bigint() {
        for bits in [3, 64, 130, 1024, 4099, 20000] {
            check_backend(bits, Backend::Ntt);
        }
    }

    #[test]
    fn auto_picks_by_size() {
        let small = ModCtx::new(&BigUint::from(1_000_003u32), Backend::Auto).unwrap();
        assert_eq!(small.backend(), Backend::Limb);
        let big = (BigUint::one() << (64 * NTT_THRESHOLD_LIMBS as u64)) + 1u32;
        assert_eq!(ModCtx::new(&big, Backend::Auto).unwrap().backend(), Backend::Ntt);
    }

    #[test]
    fn rejects_even_modulus() {
        assert!(ModCtx::new(&BigUint::from(10u32), Backend::Limb).is_err());
    }
}
