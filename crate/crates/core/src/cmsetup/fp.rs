//! Short Weierstrass curves over small prime fields, affine coordinates.

use num_bigint::BigUint;
use rand::Rng;

use crate::arith::{inv_mod, legendre, mul_mod, sqrt_mod_prime};

pub type Pt = Option<(u64, u64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpCurve {
    pub p: u64,
    pub a: u64,
    pub b: u64,
}

impl FpCurve {
    pub fn new(p: u64, a: u64, b: u64) -> Self {
        FpCurve { p, a: a % p, b: b % p }
    }

    fn add_m(&self, x: u64, y: u64) -> u64 {
        ((x as u128 + y as u128) % self.p as u128) as u64
    }

    fn sub_m(&self, x: u64, y: u64) -> u64 {
        self.add_m(x, self.p - y % self.p)
    }

    fn mul_m(&self, x: u64, y: u64) -> u64 {
        mul_mod(x, y, self.p)
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let x2 = self.mul_m(x, x);
        self.add_m(self.add_m(self.mul_m(x2, x), self.mul_m(self.a, x)), self.b)
    }

    pub fn discriminant_is_zero(&self) -> bool {
        let a3 = self.mul_m(self.mul_m(self.a, self.a), self.a);
        let b2 = self.mul_m(self.b, self.b);
        self.add_m(self.mul_m(4, a3), self.mul_m(27, b2)) == 0
    }

    pub fn contains(&self, pt: &Pt) -> bool {
        match *pt {
            None => true,
            Some((x, y)) => self.mul_m(y, y) == self.rhs(x),
        }
    }

    pub fn neg(&self, pt: &Pt) -> Pt {
        pt.map(|(x, y)| (x, (self.p - y) % self.p))
    }

    pub fn add(&self, p1: &Pt, p2: &Pt) -> Pt {
        let (Some((x1, y1)), Some((x2, y2))) = (*p1, *p2) else {
            return p1.or(*p2);
        };
        let l = if x1 == x2 {
            if self.add_m(y1, y2) == 0 {
                return None;
            }
            let num = self.add_m(self.mul_m(3, self.mul_m(x1, x1)), self.a);
            self.mul_m(num, inv_mod(self.mul_m(2, y1), self.p).unwrap())
        } else {
            self.mul_m(self.sub_m(y2, y1), inv_mod(self.sub_m(x2, x1), self.p).unwrap())
        };
        let x3 = self.sub_m(self.sub_m(self.mul_m(l, l), x1), x2);
        let y3 = self.sub_m(self.mul_m(l, self.sub_m(x1, x3)), y1);
        Some((x3, y3))
    }

    pub fn double(&self, pt: &Pt) -> Pt {
        self.add(pt, pt)
    }

    pub fn mul(&self, pt: &Pt, n: &BigUint) -> Pt {
        let mut acc: Pt = None;
        for i in (0..n.bits()).rev() {
            acc = self.double(&acc);
            if n.bit(i) {
                acc = self.add(&acc, pt);
            }
        }
        acc
    }

    pub fn mul_i64(&self, pt: &Pt, n: i64) -> Pt {
        let r = self.mul(pt, &BigUint::from(n.unsigned_abs()));
        if n < 0 {
            self.neg(&r)
        } else {
            r
        }
    }

    /// All points, the point at infinity first.
    pub fn points(&self) -> Vec<Pt> {
        let mut out = vec![None];
        for x in 0..self.p {
            let r = self.rhs(x);
            match legendre(r, self.p) {
                0 => out.push(Some((x, 0))),
                1 => {
                    let y = sqrt_mod_prime(r, self.p).unwrap();
                    out.push(Some((x, y)));
                    out.push(Some((x, self.p - y)));
                }
                _ => {}
            }
        }
        out
    }

    pub fn order(&self) -> u64 {
        let mut n = 1;
        for x in 0..self.p {
            n += (1 + legendre(self.rhs(x), self.p)) as u64;
        }
        n
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Pt {
        loop {
            let x = rng.gen_range(0..self.p);
            let r = self.rhs(x);
            if let Some(y) = sqrt_mod_prime(r, self.p) {
                let y = if rng.gen::<bool>() { y } else { (self.p - y) % self.p };
                return Some((x, y));
            }
        }
    }

    /// Largest d with pt ∈ 2^d·E(F_p), or None if pt lies in every such subgroup.
    pub fn two_depth(&self, pt: &Pt) -> Option<u32> {
        let mut set: Vec<Pt> = self.points();
        let mut d: u32 = 0;
        loop {
            if !set.contains(pt) {
                return d.checked_sub(1);
            }
            let mut next: Vec<Pt> = set.iter().map(|q| self.double(q)).collect();
            next.sort();
            next.dedup();
            if next.len() == set.len() {
                return None;
            }
            set = next;
            d += 1;
        }
    }
}

/// Image of a point under the 2-isogeny with kernel (x0, 0), given
/// t = 3x0² + a.
pub fn velu2_map(c: &FpCurve, x0: u64, t: u64, pt: &Pt) -> Pt {
    let (x, y) = (*pt)?;
    if x == x0 {
        return None;
    }
    let p = c.p;
    let inv = inv_mod((x + p - x0) % p, p).unwrap();
    let q = mul_mod(t, inv, p);
    let xn = (x + q) % p;
    let yn = mul_mod(y, (1 + p - mul_mod(q, inv, p)) % p, p);
    Some((xn, yn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn doubling_on_toy_curve() {
        // y² = x³ + 2x + 2 over F_17
        let c = FpCurve::new(17, 2, 2);
        assert_eq!(c.double(&Some((5, 1))), Some((6, 3)));
        assert_eq!(c.order(), 19);
        assert_eq!(c.points().len(), 19);
        let g = Some((5, 1));
        assert_eq!(c.mul(&g, &BigUint::from(19u32)), None);
    }

    #[test]
    fn velu_map_is_a_homomorphism() {
        // y² = x³ - x over F_23 has full 2-torsion
        let c = FpCurve::new(23, 22, 0);
        let x0 = 1u64;
        let t = (3 * x0 * x0 + c.a) % 23;
        let a2 = (c.a + 23 * 5 - 5 * t) % 23;
        let b2 = (c.b + 23 * 7 - (7 * x0 * t) % 23) % 23;
        let e2 = FpCurve::new(23, a2, b2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (p1, p2) = (c.random_point(&mut rng), c.random_point(&mut rng));
            let lhs = velu2_map(&c, x0, t, &c.add(&p1, &p2));
            let rhs = e2.add(&velu2_map(&c, x0, t, &p1), &velu2_map(&c, x0, t, &p2));
            assert_eq!(lhs, rhs);
            assert!(e2.contains(&velu2_map(&c, x0, t, &p1)));
        }
    }

    #[test]
    fn two_depth_of_cyclic_group() {
        // y² = x³ + x over F_5: 4 points, Z/2 × Z/2
        let c = FpCurve::new(5, 1, 0);
        assert_eq!(c.order(), 4);
        assert_eq!(c.two_depth(&Some((0, 0))), Some(0));
    }
}
