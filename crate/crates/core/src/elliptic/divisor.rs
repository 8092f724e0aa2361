use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, TorusPoint};
use crate::scalar::Real;

/// Effective divisor on the torus: distinct points with positive multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Divisor<T: Real> {
    parts: Vec<(TorusPoint<T>, u32)>,
}

impl<T: Real> Default for Divisor<T> {
    fn default() -> Self {
        Self { parts: Vec::new() }
    }
}

impl<T: Real> Divisor<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a divisor, merging points that agree modulo the lattice within `tol`.
    pub fn new<I>(parts: I, lattice: &Lattice<T>, tol: T) -> Self
    where
        I: IntoIterator<Item = (TorusPoint<T>, u32)>,
    {
        let mut out = Self::zero();
        for (p, m) in parts {
            out.insert(p, m, lattice, tol);
        }
        out
    }

    pub fn from_points<I>(points: I, lattice: &Lattice<T>, tol: T) -> Self
    where
        I: IntoIterator<Item = TorusPoint<T>>,
    {
        Self::new(points.into_iter().map(|p| (p, 1)), lattice, tol)
    }

    pub fn single(p: TorusPoint<T>) -> Self {
        Self { parts: vec![(p, 1)] }
    }

    fn insert(&mut self, p: TorusPoint<T>, m: u32, lattice: &Lattice<T>, tol: T) {
        if m == 0 {
            return;
        }
        match self.parts.iter_mut().find(|(q, _)| lattice.eq(q, &p, tol)) {
            Some((_, k)) => *k += m,
            None => self.parts.push((p, m)),
        }
    }

    pub fn parts(&self) -> &[(TorusPoint<T>, u32)] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().map(|(_, m)| *m as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Points listed with repetition.
    pub fn points(&self) -> impl Iterator<Item = TorusPoint<T>> + '_ {
        self.parts
            .iter()
            .flat_map(|(p, m)| std::iter::repeat_n(*p, *m as usize))
    }

    pub fn multiplicity(&self, p: &TorusPoint<T>, lattice: &Lattice<T>, tol: T) -> u32 {
        self.parts
            .iter()
            .find(|(q, _)| lattice.eq(q, p, tol))
            .map_or(0, |(_, m)| *m)
    }

    /// The group-law sum of the points, counted with multiplicity.
    pub fn sum(&self, lattice: &Lattice<T>) -> TorusPoint<T> {
        let mut acc = num_complex::Complex::new(T::zero(), T::zero());
        for (p, m) in &self.parts {
            acc = acc + p.z() * T::of(*m as f64);
        }
        lattice.reduce(acc)
    }

    pub fn plus(&self, other: &Self, lattice: &Lattice<T>, tol: T) -> Self {
        let mut out = self.clone();
        for (p, m) in &other.parts {
            out.insert(*p, *m, lattice, tol);
        }
        out
    }

    pub fn gcd(&self, other: &Self, lattice: &Lattice<T>, tol: T) -> Self {
        let parts = self.parts.iter().filter_map(|(p, m)| {
            let k = other.multiplicity(p, lattice, tol).min(*m);
            (k > 0).then_some((*p, k))
        });
        Self::new(parts, lattice, tol)
    }

    pub fn lcm(&self, other: &Self, lattice: &Lattice<T>, tol: T) -> Self {
        let mut out = self.clone();
        for (p, m) in &other.parts {
            let have = out.multiplicity(p, lattice, tol);
            if *m > have {
                out.insert(*p, m - have, lattice, tol);
            }
        }
        out
    }

    /// Same points with the same multiplicities.
    pub fn same_as(&self, other: &Self, lattice: &Lattice<T>, tol: T) -> bool {
        self.degree() == other.degree()
            && self
                .parts
                .iter()
                .all(|(p, m)| other.multiplicity(p, lattice, tol) == *m)
    }

    /// Disjoint supports.
    pub fn disjoint(&self, other: &Self, lattice: &Lattice<T>, tol: T) -> bool {
        self.gcd(other, lattice, tol).is_zero()
    }
}

/// `D1 ~ D2` on an elliptic curve: equal degree and equal sum.
pub fn lin_equiv<T: Real>(d1: &Divisor<T>, d2: &Divisor<T>, lattice: &Lattice<T>, tol: T) -> bool {
    d1.degree() == d2.degree() && lattice.eq(&d1.sum(lattice), &d2.sum(lattice), tol)
}

pub fn random_point<T: Real, R: Rng + ?Sized>(lattice: &Lattice<T>, rng: &mut R) -> TorusPoint<T> {
    let s: f64 = rng.random();
    let t: f64 = rng.random();
    lattice.reduce(lattice.from_coords(T::of(s), T::of(t)))
}

/// A random element of `σ⁻¹(x) ⊂ E^[d]`: `d - 1` uniform points, the last one
/// fixed by the sum. Points are pairwise separated by more than `sep`.
pub fn random_divisor_with_sum<T: Real, R: Rng + ?Sized>(
    d: usize,
    x: &TorusPoint<T>,
    lattice: &Lattice<T>,
    sep: T,
    rng: &mut R,
) -> Divisor<T> {
    assert!(d >= 1, "divisor degree must be positive");
    if d == 1 {
        return Divisor::single(*x);
    }
    loop {
        let mut pts: Vec<TorusPoint<T>> = (0..d - 1).map(|_| random_point(lattice, rng)).collect();
        let partial = pts
            .iter()
            .fold(lattice.zero(), |acc, p| lattice.add(&acc, p));
        pts.push(lattice.sub(x, &partial));
        let distinct = pts
            .iter()
            .enumerate()
            .all(|(i, p)| pts[..i].iter().all(|q| lattice.distance(p, q) > sep));
        if distinct {
            return Divisor { parts: pts.into_iter().map(|p| (p, 1)).collect() };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat() -> Lattice<f64> {
        Lattice::new(Complex::new(0.17, 1.05)).unwrap()
    }

    fn pt(l: &Lattice<f64>, s: f64, t: f64) -> TorusPoint<f64> {
        l.reduce(l.from_coords(s, t))
    }

    #[test]
    fn gcd_lcm_examples() {
        let l = lat();
        let (x, y, z) = (pt(&l, 0.1, 0.2), pt(&l, 0.5, 0.7), pt(&l, 0.8, 0.1));
        let d1 = Divisor::new([(x, 2), (y, 1)], &l, 1e-10);
        let d2 = Divisor::new([(x, 1), (z, 1)], &l, 1e-10);
        let g = d1.gcd(&d2, &l, 1e-10);
        let m = d1.lcm(&d2, &l, 1e-10);
        assert!(g.same_as(&Divisor::single(x), &l, 1e-10));
        assert!(m.same_as(&Divisor::new([(x, 2), (y, 1), (z, 1)], &l, 1e-10), &l, 1e-10));
        assert_eq!(g.degree() + m.degree(), d1.degree() + d2.degree());

        let a = Divisor::single(y);
        let b = Divisor::single(z);
        assert!(a.gcd(&b, &l, 1e-10).is_zero());
        assert!(a.lcm(&b, &l, 1e-10).same_as(&a.plus(&b, &l, 1e-10), &l, 1e-10));
        assert!(d1.gcd(&d1, &l, 1e-10).same_as(&d1, &l, 1e-10));
        assert!(d1.lcm(&d1, &l, 1e-10).same_as(&d1, &l, 1e-10));
    }

    #[test]
    fn sums_and_equivalence() {
        let l = lat();
        let (x, y) = (pt(&l, 0.3, 0.4), pt(&l, 0.6, 0.05));
        assert!(l.eq(&Divisor::single(x).sum(&l), &x, 1e-12));
        let n_zero = Divisor::new([(l.zero(), 5)], &l, 1e-10);
        assert!(l.eq(&n_zero.sum(&l), &l.zero(), 1e-12));
        let lsum = pt(&l, 0.9, 0.35);
        let pair = Divisor::from_points([x, l.sub(&lsum, &x)], &l, 1e-10);
        assert!(l.eq(&pair.sum(&l), &lsum, 1e-12));

        let d1 = Divisor::from_points([x, y], &l, 1e-10);
        let d2 = Divisor::from_points([l.add(&x, &y), l.zero()], &l, 1e-10);
        assert!(lin_equiv(&d1, &d2, &l, 1e-10));
        assert!(!lin_equiv(&Divisor::single(x), &Divisor::single(y), &l, 1e-10));
    }

    #[test]
    fn random_unequal_sums_are_inequivalent() {
        let l = lat();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = random_point(&l, &mut rng);
            let y = random_point(&l, &mut rng);
            let d1 = random_divisor_with_sum(3, &x, &l, 1e-3, &mut rng);
            let d2 = random_divisor_with_sum(3, &y, &l, 1e-3, &mut rng);
            assert_eq!(lin_equiv(&d1, &d2, &l, 1e-10), l.eq(&x, &y, 1e-10));
        }
    }

    #[test]
    fn random_divisor_fibre() {
        let l = lat();
        let x = pt(&l, 0.42, 0.13);
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        assert!(random_divisor_with_sum(1, &x, &l, 1e-3, &mut r1).same_as(&Divisor::single(x), &l, 1e-12));
        let a = random_divisor_with_sum(4, &x, &l, 1e-3, &mut r1);
        let b = random_divisor_with_sum(4, &x, &l, 1e-3, &mut r2);
        assert_eq!(a.degree(), 4);
        assert_eq!(a.parts().len(), 4);
        assert!(l.eq(&a.sum(&l), &x, 1e-10));
        assert!(lin_equiv(&a, &b, &l, 1e-10));
        assert!(!a.same_as(&b, &l, 1e-10));
    }

    #[test]
    fn sum_is_additive() {
        let l = lat();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_point(&l, &mut rng);
            let y = random_point(&l, &mut rng);
            let a = random_divisor_with_sum(2, &x, &l, 1e-3, &mut rng);
            let b = random_divisor_with_sum(3, &y, &l, 1e-3, &mut rng);
            let s = a.plus(&b, &l, 1e-10).sum(&l);
            assert!(l.eq(&s, &l.add(&a.sum(&l), &b.sum(&l)), 1e-10));
        }
    }
}
