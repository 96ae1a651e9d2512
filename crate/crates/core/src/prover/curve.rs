//! Inversion-free projective arithmetic on y²z = x³ + axz² + bz³ over Z/N.

use num_bigint::BigUint;

use super::modarith::{Elem, ModCtx};

/// Window width of the scalar ladder.
pub const WINDOW: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjPoint {
    pub x: Elem,
    pub y: Elem,
    pub z: Elem,
}

#[derive(Clone, Debug)]
pub struct Curve<'a> {
    pub ctx: &'a ModCtx,
    pub a: Elem,
    pub b: Elem,
}

impl<'a> Curve<'a> {
    pub fn new(ctx: &'a ModCtx, a: &BigUint, b: &BigUint) -> Self {
        Curve {
            ctx,
            a: ctx.from_big(a),
            b: ctx.from_big(b),
        }
    }

    pub fn identity(&self) -> ProjPoint {
        ProjPoint {
            x: self.ctx.zero(),
            y: self.ctx.one(),
            z: self.ctx.zero(),
        }
    }

    pub fn affine(&self, x: &BigUint, y: &BigUint) -> ProjPoint {
        ProjPoint {
            x: self.ctx.from_big(x),
            y: self.ctx.from_big(y),
            z: self.ctx.one(),
        }
    }

    /// Normal-form coordinates (X, Y, Z).
    pub fn coords(&self, p: &ProjPoint) -> [BigUint; 3] {
        [self.ctx.to_big(&p.x), self.ctx.to_big(&p.y), self.ctx.to_big(&p.z)]
    }

    pub fn on_curve(&self, p: &ProjPoint) -> bool {
        let c = self.ctx;
        let zz = c.sqr(&p.z);
        let lhs = c.mul(&c.sqr(&p.y), &p.z);
        let x3 = c.mul(&c.sqr(&p.x), &p.x);
        let axz2 = c.mul(&c.mul(&self.a, &p.x), &zz);
        let bz3 = c.mul(&c.mul(&self.b, &zz), &p.z);
        lhs == c.add(&c.add(&x3, &axz2), &bz3)
    }

    pub fn double(&self, p: &ProjPoint) -> ProjPoint {
        let c = self.ctx;
        if c.is_zero(&p.z) {
            return p.clone();
        }
        let xx = c.sqr(&p.x);
        let zz = c.sqr(&p.z);
        let w = c.add(&c.mul(&self.a, &zz), &c.add(&c.dbl(&xx), &xx));
        let s = c.dbl(&c.mul(&p.y, &p.z));
        let ss = c.sqr(&s);
        let sss = c.mul(&s, &ss);
        let r = c.mul(&p.y, &s);
        let rr = c.sqr(&r);
        let bb = c.sub(&c.sub(&c.sqr(&c.add(&p.x, &r)), &xx), &rr);
        let h = c.sub(&c.sqr(&w), &c.dbl(&bb));
        ProjPoint {
            x: c.mul(&h, &s),
            y: c.sub(&c.mul(&w, &c.sub(&bb, &h)), &c.dbl(&rr)),
            z: sss,
        }
    }

    /// p + q for p ≠ ±q; identity inputs are passed through.
    pub fn add(&self, p: &ProjPoint, q: &ProjPoint) -> ProjPoint {
        let c = self.ctx;
        if c.is_zero(&p.z) {
            return q.clone();
        }
        if c.is_zero(&q.z) {
            return p.clone();
        }
        let y1z2 = c.mul(&p.y, &q.z);
        let x1z2 = c.mul(&p.x, &q.z);
        let z1z2 = c.mul(&p.z, &q.z);
        let u = c.sub(&c.mul(&q.y, &p.z), &y1z2);
        let uu = c.sqr(&u);
        let v = c.sub(&c.mul(&q.x, &p.z), &x1z2);
        if c.is_zero(&u) && c.is_zero(&v) {
            return self.double(p);
        }
        let vv = c.sqr(&v);
        let vvv = c.mul(&v, &vv);
        let r = c.mul(&vv, &x1z2);
        let aa = c.sub(&c.sub(&c.mul(&uu, &z1z2), &vvv), &c.dbl(&r));
        ProjPoint {
            x: c.mul(&v, &aa),
            y: c.sub(&c.mul(&u, &c.sub(&r, &aa)), &c.mul(&vvv, &y1z2)),
            z: c.mul(&vvv, &z1z2),
        }
    }

    pub fn double_n(&self, p: &ProjPoint, n: u64) -> ProjPoint {
        let mut q = p.clone();
        for _ in 0..n {
            q = self.double(&q);
        }
        q
    }

    /// [n]p by a fixed 4-bit window from the top digit down.
    pub fn mul(&self, p: &ProjPoint, n: &BigUint) -> ProjPoint {
        let size = 1usize << WINDOW;
        let mut table = vec![self.identity(), p.clone()];
        for i in 2..size {
            let next = if i % 2 == 0 {
                self.double(&table[i / 2])
            } else {
                self.add(&table[i - 1], p)
            };
            table.push(next);
        }
        let digits = window_digits(n);
        let mut acc = self.identity();
        for (i, &d) in digits.iter().enumerate() {
            if i > 0 {
                acc = self.double_n(&acc, WINDOW as u64);
            }
            if d != 0 {
                acc = self.add(&acc, &table[d]);
            }
        }
        acc
    }
}

/// Base-16 digits of n, most significant first.
pub fn window_digits(n: &BigUint) -> Vec<usize> {
    let bits = n.bits();
    let count = ((bits + WINDOW as u64 - 1) / WINDOW as u64).max(1);
    (0..count)
        .rev()
        .map(|i| {
            (0..WINDOW as u64).fold(0usize, |d, b| d | ((n.bit(i * WINDOW as u64 + b) as usize) << b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmsetup::fp::FpCurve;
    use crate::prover::modarith::Backend;

    fn to_affine(c: &Curve, p: &ProjPoint) -> Option<(u64, u64)> {
        let [x, y, z] = c.coords(p);
        let n = c.ctx.modulus();
        if z == BigUint::from(0u32) {
            return None;
        }
        let zi = z.modpow(&(n - 2u32), n);
        let ax = (x * &zi) % n;
        let ay = (y * &zi) % n;
        Some((ax.try_into().unwrap(), ay.try_into().unwrap()))
    }

    #[test]
    fn toy_doubling() {
        for backend in [Backend::Limb, Backend::Ntt] {
            let ctx = ModCtx::new(&BigUint::from(17u32), backend).unwrap();
            let c = Curve::new(&ctx, &BigUint::from(2u32), &BigUint::from(2u32));
            let p = c.affine(&BigUint::from(5u32), &BigUint::from(1u32));
            assert!(c.on_curve(&p));
            assert_eq!(to_affine(&c, &c.double(&p)), Some((6, 3)));
            assert_eq!(c.add(&p, &c.identity()), p);
            assert!(ctx.is_zero(&c.mul(&p, &BigUint::from(19u32)).z));
        }
    }

    #[test]
    fn two_torsion_doubles_to_identity() {
        // y² = x³ − x over F_23, (1, 0)
        let ctx = ModCtx::new(&BigUint::from(23u32), Backend::Limb).unwrap();
        let c = Curve::new(&ctx, &BigUint::from(22u32), &BigUint::from(0u32));
        let t = c.affine(&BigUint::from(1u32), &BigUint::from(0u32));
        assert!(ctx.is_zero(&c.double(&t).z));
    }

    #[test]
    fn ladder_matches_repeated_addition() {
        let p = 1009u64;
        let fc = FpCurve::new(p, 3, 7);
        let order_of = |q: &Option<(u64, u64)>| {
            let mut acc = *q;
            let mut m = 1u64;
            while acc.is_some() {
                acc = fc.add(&acc, q);
                m += 1;
            }
            m
        };
        let pt = fc.points().into_iter().skip(1).max_by_key(order_of).unwrap();
        let ord = order_of(&pt);
        assert!(ord > 900);
        let (x, y) = pt.unwrap();
        let ctx = ModCtx::new(&BigUint::from(p), Backend::Limb).unwrap();
        let c = Curve::new(&ctx, &BigUint::from(3u32), &BigUint::from(7u32));
        let g = c.affine(&BigUint::from(x), &BigUint::from(y));
        let mut acc = None;
        for n in 1..ord {
            acc = fc.add(&acc, &pt);
            let got = to_affine(&c, &c.mul(&g, &BigUint::from(n)));
            assert_eq!(got, acc, "n = {n}");
        }
        assert!(c.on_curve(&c.mul(&g, &BigUint::from(777u32))));
        assert_eq!(c.mul(&g, &BigUint::from(8u32)), c.double_n(&g, 3));
    }

    #[test]
    fn digits_are_base_sixteen() {
        assert_eq!(window_digits(&BigUint::from(0x1a3u32)), vec![1, 10, 3]);
        assert_eq!(window_digits(&BigUint::from(0u32)), vec![0]);
    }
}
