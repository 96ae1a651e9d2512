//! Number-theoretic transform modulo a 62-bit prime with 2^20 | P − 1, used
//! for subquadratic multiplication of multi-thousand-bit residues.
//!
//! Butterflies keep values lazily reduced in [0, 4P) and multiply by fixed
//! twiddles with precomputed quotients; pointwise products use Montgomery
//! reduction.

pub const P: u64 = 0x3fff_ffff_feb0_0001;
const TWO_P: u64 = 2 * P;
const GENERATOR: u64 = 3;
/// Digit width for splitting integers. With transform length at most
/// 2^MAX_LOG_LEN, every convolution sum stays below P.
pub const DIGIT_BITS: u32 = 24;
const DIGIT_MASK: u64 = (1 << DIGIT_BITS) - 1;
pub const MAX_LOG_LEN: u32 = 13;
/// −P⁻¹ mod 2^64.
const P_NEG_INV: u64 = {
    let mut x: u64 = 1;
    let mut i = 0;
    while i < 6 {
        x = x.wrapping_mul(2u64.wrapping_sub(P.wrapping_mul(x)));
        i += 1;
    }
    x.wrapping_neg()
};

/// Plain modular product, for setup work.
pub fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

pub fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    b %= P;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    r
}

/// a·b·2^{−64} mod P in [0, 2P), for a·b < P·2^64.
#[inline(always)]
fn redc(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let m = (t as u64).wrapping_mul(P_NEG_INV);
    ((t + m as u128 * P as u128) >> 64) as u64
}

/// A fixed multiplier w with its quotient ⌊w·2^64/P⌋.
#[derive(Clone, Copy, Debug)]
struct Shoup {
    w: u64,
    q: u64,
}

impl Shoup {
    fn new(w: u64) -> Self {
        Shoup {
            w,
            q: (((w as u128) << 64) / P as u128) as u64,
        }
    }

    /// x·w mod P in [0, 2P), for any x < 2^64.
    #[inline(always)]
    fn mul(self, x: u64) -> u64 {
        let hi = ((x as u128 * self.q as u128) >> 64) as u64;
        x.wrapping_mul(self.w).wrapping_sub(hi.wrapping_mul(P))
    }
}

/// Transforms of one fixed power-of-two length.
#[derive(Clone, Debug)]
pub struct Ntt {
    pub len: usize,
    /// tw[j] = ω_len^j for j < len/2. Stage half-width h reads every
    /// (len/2h)-th entry, which keeps the hot set small.
    tw: Vec<Shoup>,
    itw: Vec<Shoup>,
    /// 2^64 / len mod P: undoes the Montgomery factor of a pointwise product
    /// and the length factor of the inverse.
    scale: Shoup,
}

impl Ntt {
    pub fn new(log_len: u32) -> Self {
        assert!((1..=MAX_LOG_LEN).contains(&log_len));
        let len = 1usize << log_len;
        let w = pow(GENERATOR, (P - 1) / len as u64);
        let wi = pow(w, P - 2);
        let (mut tw, mut itw) = (Vec::with_capacity(len / 2), Vec::with_capacity(len / 2));
        let (mut x, mut y) = (1, 1);
        for _ in 0..len / 2 {
            tw.push(Shoup::new(x));
            itw.push(Shoup::new(y));
            x = mul(x, w);
            y = mul(y, wi);
        }
        let r = ((1u128 << 64) % P as u128) as u64;
        let scale = mul(r, pow(len as u64, P - 2));
        Ntt {
            len,
            tw,
            itw,
            scale: Shoup::new(scale),
        }
    }

    /// Gentleman-Sande; natural order in, bit-reversed order out. Inputs in
    /// [0, 2P), outputs in [0, 2P).
    pub fn forward(&self, a: &mut [u64]) {
        let n = self.len;
        let mut half = n / 2;
        while half >= 1 {
            let stride = n / (2 * half);
            for chunk in a[..n].chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(self.tw.iter().step_by(stride)) {
                    let u = *x;
                    let v = *y;
                    let s = u + v;
                    *x = if s >= TWO_P { s - TWO_P } else { s };
                    *y = w.mul(u + TWO_P - v);
                }
            }
            half /= 2;
        }
    }

    /// Cooley-Tukey inverse; bit-reversed in, natural out, unscaled.
    /// Inputs in [0, 2P), outputs in [0, 4P).
    pub fn inverse_unscaled(&self, a: &mut [u64]) {
        let n = self.len;
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for chunk in a[..n].chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(self.itw.iter().step_by(stride)) {
                    let u = if *x >= TWO_P { *x - TWO_P } else { *x };
                    let v = w.mul(*y);
                    *x = u + v;
                    *y = u + TWO_P - v;
                }
            }
            half *= 2;
        }
    }

    /// Digits of a little-endian limb vector, zero-padded to the transform
    /// length, and transformed.
    pub fn transform_limbs(&self, limbs: &[u64]) -> Vec<u64> {
        let mut d = vec![0u64; self.len];
        self.load(&mut d, limbs);
        d
    }

    /// `transform_limbs` into an existing buffer of the transform length.
    pub fn load(&self, buf: &mut [u64], limbs: &[u64]) {
        to_digits(limbs, buf);
        self.forward(buf);
    }

    /// Pointwise product of two transforms, inverted and carried into
    /// `out_limbs` limbs (truncating higher ones).
    pub fn product_limbs(&self, fa: &[u64], fb: &[u64], out_limbs: usize) -> Vec<u64> {
        let mut c = fa.to_vec();
        self.multiply_into(&mut c, fb, out_limbs)
    }

    /// `product_limbs` that overwrites the first transform.
    pub fn multiply_into(&self, fa: &mut [u64], fb: &[u64], out_limbs: usize) -> Vec<u64> {
        let s = self.scale;
        for (x, &y) in fa.iter_mut().zip(fb) {
            *x = s.mul(redc(*x, y));
        }
        self.finish(fa, out_limbs)
    }

    /// The square of a transform, overwriting it.
    pub fn square_into(&self, fa: &mut [u64], out_limbs: usize) -> Vec<u64> {
        let s = self.scale;
        for x in fa.iter_mut() {
            *x = s.mul(redc(*x, *x));
        }
        self.finish(fa, out_limbs)
    }

    fn finish(&self, fa: &mut [u64], out_limbs: usize) -> Vec<u64> {
        self.inverse_unscaled(fa);
        for x in fa.iter_mut() {
            *x %= P;
        }
        from_digits(fa, out_limbs)
    }
}

pub fn digits_for_limbs(limbs: usize) -> usize {
    (limbs * 64 + DIGIT_BITS as usize - 1) / DIGIT_BITS as usize
}

fn to_digits(limbs: &[u64], out: &mut [u64]) {
    let total = limbs.len() * 64;
    let mut bit = 0;
    let mut i = 0;
    while bit < total {
        let w = bit / 64;
        let off = bit % 64;
        let mut v = limbs[w] >> off;
        if off + DIGIT_BITS as usize > 64 && w + 1 < limbs.len() {
            v |= limbs[w + 1] << (64 - off);
        }
        out[i] = v & DIGIT_MASK;
        i += 1;
        bit += DIGIT_BITS as usize;
    }
    out[i..].fill(0);
}

fn from_digits(c: &[u64], out_limbs: usize) -> Vec<u64> {
    let mut out = vec![0u64; out_limbs];
    let total = out_limbs * 64;
    let mut carry: u128 = 0;
    let mut bit = 0usize;
    for &x in c {
        if bit >= total {
            break;
        }
        carry += x as u128;
        put_bits(&mut out, bit, (carry as u64) & DIGIT_MASK);
        carry >>= DIGIT_BITS;
        bit += DIGIT_BITS as usize;
    }
    while carry > 0 && bit < total {
        put_bits(&mut out, bit, (carry as u64) & DIGIT_MASK);
        carry >>= DIGIT_BITS;
        bit += DIGIT_BITS as usize;
    }
    out
}

#[inline]
fn put_bits(out: &mut [u64], bit: usize, d: u64) {
    let w = bit / 64;
    let off = bit % 64;
    out[w] |= d << off;
    if off + DIGIT_BITS as usize > 64 && w + 1 < out.len() {
        out[w + 1] |= d >> (64 - off);
    }
}
