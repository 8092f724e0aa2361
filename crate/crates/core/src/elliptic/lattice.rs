use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of the complex torus `C / (Z + Z·tau)`, stored as its canonical
/// representative `s + t·tau` with `s, t ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct TorusPoint<T: Real> {
    z: Complex<T>,
}

impl<T: Real> TorusPoint<T> {
    /// Wraps a value that is already a canonical representative. Use
    /// [`Lattice::reduce`] for arbitrary complex numbers.
    pub(crate) fn from_canonical(z: Complex<T>) -> Self {
        Self { z }
    }

    pub fn z(&self) -> Complex<T> {
        self.z
    }
}

impl<T: Real> From<[T; 2]> for TorusPoint<T> {
    fn from(v: [T; 2]) -> Self {
        Self { z: Complex::new(v[0], v[1]) }
    }
}

impl<T: Real> From<TorusPoint<T>> for [T; 2] {
    fn from(p: TorusPoint<T>) -> Self {
        [p.z.re, p.z.im]
    }
}

/// The period lattice `Z + Z·tau` together with the group law on the quotient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice<T: Real> {
    tau: Complex<T>,
}

impl<T: Real> Lattice<T> {
    pub fn new(tau: Complex<T>) -> Result<Self> {
        if !(tau.im > T::zero()) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "Im(tau) must be positive, got tau = {} + {}i",
                tau.re, tau.im
            )));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    /// Real coordinates `(s, t)` with `z = s + t·tau`.
    pub fn coords(&self, z: Complex<T>) -> (T, T) {
        let t = z.im / self.tau.im;
        (z.re - t * self.tau.re, t)
    }

    pub fn from_coords(&self, s: T, t: T) -> Complex<T> {
        Complex::new(s, T::zero()) + self.tau * t
    }

    pub fn reduce(&self, z: Complex<T>) -> TorusPoint<T> {
        let (s, t) = self.coords(z);
        TorusPoint::from_canonical(self.from_coords(unit_fraction(s), unit_fraction(t)))
    }

    /// Integer parts `(a, b)` with `z - a - b·tau` canonical.
    pub fn lattice_part(&self, z: Complex<T>) -> (i64, i64) {
        let (s, t) = self.coords(z);
        let a = (s - unit_fraction(s)).round();
        let b = (t - unit_fraction(t)).round();
        (a.to_i64().unwrap_or(0), b.to_i64().unwrap_or(0))
    }

    /// Nearest lattice vector `(a, b)` to `z`, returned with the residual `z - a - b·tau`.
    pub fn nearest_lattice_vector(&self, z: Complex<T>) -> ((i64, i64), Complex<T>) {
        let (s, t) = self.coords(z);
        let (a, b) = (s.round(), t.round());
        let residual = z - self.from_coords(a, b);
        ((a.to_i64().unwrap_or(0), b.to_i64().unwrap_or(0)), residual)
    }

    pub fn zero(&self) -> TorusPoint<T> {
        TorusPoint::from_canonical(Complex::new(T::zero(), T::zero()))
    }

    pub fn add(&self, p: &TorusPoint<T>, q: &TorusPoint<T>) -> TorusPoint<T> {
        self.reduce(p.z + q.z)
    }

    pub fn sub(&self, p: &TorusPoint<T>, q: &TorusPoint<T>) -> TorusPoint<T> {
        self.reduce(p.z - q.z)
    }

    pub fn negate(&self, p: &TorusPoint<T>) -> TorusPoint<T> {
        self.reduce(-p.z)
    }

    pub fn scale(&self, p: &TorusPoint<T>, k: i64) -> TorusPoint<T> {
        self.reduce(p.z * T::of(k as f64))
    }

    /// Offset of `z - w` from the nearest lattice vector.
    pub fn separation(&self, z: Complex<T>, w: Complex<T>) -> Complex<T> {
        self.nearest_lattice_vector(z - w).1
    }

    /// Equality modulo the lattice: both real and imaginary parts of the
    /// offset to the nearest translate must be within `tol`.
    pub fn eq(&self, p: &TorusPoint<T>, q: &TorusPoint<T>, tol: T) -> bool {
        let d = self.separation(p.z, q.z);
        d.re.abs() <= tol && d.im.abs() <= tol
    }

    pub fn distance(&self, p: &TorusPoint<T>, q: &TorusPoint<T>) -> T {
        self.separation(p.z, q.z).norm()
    }

    /// `E[2] = {0, 1/2, tau/2, (1+tau)/2}`.
    pub fn two_torsion(&self) -> [TorusPoint<T>; 4] {
        let h = T::of(0.5);
        [
            self.reduce(Complex::new(T::zero(), T::zero())),
            self.reduce(Complex::new(h, T::zero())),
            self.reduce(self.tau * h),
            self.reduce((self.tau + T::one()) * h),
        ]
    }

    /// The four solutions of `2ω = x`.
    pub fn halves(&self, x: &TorusPoint<T>) -> [TorusPoint<T>; 4] {
        let base = x.z * T::of(0.5);
        self.two_torsion().map(|e| self.reduce(base + e.z))
    }
}

fn unit_fraction<T: Real>(v: T) -> T {
    let f = v - v.floor();
    // Rounding can leave f a hair below 1; fold it back so reduction is idempotent.
    if T::one() - f <= T::epsilon() * T::of(64.0) * v.abs().max(T::one()) {
        T::zero()
    } else {
        f
    }
}
