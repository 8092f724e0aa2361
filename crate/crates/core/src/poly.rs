//! Sparse homogeneous polynomials with complex coefficients.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

pub type Exponent = Vec<u32>;

/// All exponent vectors of total degree `degree` in `num_vars` variables,
/// in lexicographically decreasing order.
pub fn monomials(num_vars: usize, degree: u32) -> Vec<Exponent> {
    fn rec(prefix: &mut Exponent, left: usize, deg: u32, out: &mut Vec<Exponent>) {
        if left == 1 {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(prefix, left - 1, deg - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if num_vars == 0 {
        return out;
    }
    rec(&mut Vec::with_capacity(num_vars), num_vars, degree, &mut out);
    out
}

/// `C(num_vars + degree - 1, degree)`.
pub fn monomial_count(num_vars: usize, degree: u32) -> usize {
    let (n, k) = (num_vars + degree as usize - 1, degree as usize);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Table `x_i^k` for `k ≤ degree`.
fn powers<T: Real>(point: &[Complex<T>], degree: u32) -> Vec<Vec<Complex<T>>> {
    point
        .iter()
        .map(|x| {
            let mut row = Vec::with_capacity(degree as usize + 1);
            let mut acc = Complex::new(T::one(), T::zero());
            for _ in 0..=degree {
                row.push(acc);
                acc = acc * x;
            }
            row
        })
        .collect()
}

pub fn monomial_value<T: Real>(table: &[Vec<Complex<T>>], e: &[u32]) -> Complex<T> {
    e.iter()
        .zip(table)
        .fold(Complex::new(T::one(), T::zero()), |acc, (k, row)| acc * row[*k as usize])
}

/// A homogeneous polynomial. Terms are kept sorted and free of exact zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Polynomial<T: Real> {
    num_vars: usize,
    degree: u32,
    coeffs: Vec<(Exponent, Complex<T>)>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(num_vars: usize, degree: u32) -> Self {
        Self { num_vars, degree, coeffs: Vec::new() }
    }

    pub fn constant(num_vars: usize, c: Complex<T>) -> Self {
        Self::from_terms(num_vars, 0, [(vec![0; num_vars], c)])
    }

    /// Sums repeated exponents; panics if a term has the wrong length or degree.
    pub fn from_terms<I>(num_vars: usize, degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Complex<T>)>,
    {
        let mut map: BTreeMap<Exponent, Complex<T>> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), num_vars, "exponent length");
            assert_eq!(e.iter().sum::<u32>(), degree, "inhomogeneous term");
            let slot = map.entry(e).or_insert(Complex::new(T::zero(), T::zero()));
            *slot = *slot + c;
        }
        let coeffs = map
            .into_iter()
            .rev()
            .filter(|(_, c)| *c != Complex::new(T::zero(), T::zero()))
            .collect();
        Self { num_vars, degree, coeffs }
    }

    /// `Σ c_i x_i`.
    pub fn linear(coeffs: &[Complex<T>]) -> Self {
        let n = coeffs.len();
        Self::from_terms(
            n,
            1,
            coeffs.iter().enumerate().map(|(i, c)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, *c)
            }),
        )
    }

    /// Coefficients listed against `basis` (all of one degree).
    pub fn from_coefficients(num_vars: usize, degree: u32, basis: &[Exponent], values: &[Complex<T>]) -> Self {
        Self::from_terms(num_vars, degree, basis.iter().cloned().zip(values.iter().copied()))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(Exponent, Complex<T>)] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, e: &[u32]) -> Complex<T> {
        self.coeffs
            .iter()
            .find(|(f, _)| f.as_slice() == e)
            .map(|(_, c)| *c)
            .unwrap_or(Complex::new(T::zero(), T::zero()))
    }

    pub fn coefficient_vector(&self, basis: &[Exponent]) -> Vec<Complex<T>> {
        let map: BTreeMap<&Exponent, Complex<T>> = self.coeffs.iter().map(|(e, c)| (e, *c)).collect();
        basis
            .iter()
            .map(|e| map.get(e).copied().unwrap_or(Complex::new(T::zero(), T::zero())))
            .collect()
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.iter().map(|(_, c)| c.norm()).fold(T::zero(), T::max)
    }

    /// Drops terms below `threshold` times the largest coefficient.
    pub fn pruned(&self, threshold: T) -> Self {
        let cut = self.max_coeff() * threshold;
        Self {
            num_vars: self.num_vars,
            degree: self.degree,
            coeffs: self.coeffs.iter().filter(|(_, c)| c.norm() > cut).cloned().collect(),
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self::from_terms(self.num_vars, self.degree, self.coeffs.iter().map(|(e, c)| (e.clone(), *c * k)))
    }

    /// Largest-magnitude coefficient becomes exactly 1.
    pub fn normalized(&self) -> Self {
        match self.coeffs.iter().max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap()) {
            Some((_, c)) => self.scale(c.inv()),
            None => self.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.num_vars, self.degree), (other.num_vars, other.degree));
        Self::from_terms(self.num_vars, self.degree, self.coeffs.iter().chain(&other.coeffs).cloned())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.num_vars, other.num_vars);
        let mut terms = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (e, a) in &self.coeffs {
            for (f, b) in &other.coeffs {
                terms.push((e.iter().zip(f).map(|(x, y)| x + y).collect(), *a * b));
            }
        }
        Self::from_terms(self.num_vars, self.degree + other.degree, terms)
    }

    pub fn partial(&self, var: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(self.num_vars, 0);
        }
        let terms = self.coeffs.iter().filter(|(e, _)| e[var] > 0).map(|(e, c)| {
            let mut f = e.clone();
            f[var] -= 1;
            (f, *c * T::of(e[var] as f64))
        });
        Self::from_terms(self.num_vars, self.degree - 1, terms)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.num_vars).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, point: &[Complex<T>]) -> Complex<T> {
        let table = powers(point, self.degree);
        self.eval_with(&table)
    }

    pub(crate) fn eval_with(&self, table: &[Vec<Complex<T>>]) -> Complex<T> {
        self.coeffs
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (e, c)| acc + *c * monomial_value(table, e))
    }

    /// `Σ |c_β| |p^β|`: the size of the terms that cancel in `eval`.
    pub fn abs_eval(&self, point: &[Complex<T>]) -> T {
        let table = powers(point, self.degree);
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, (e, c)| acc + c.norm() * monomial_value(&table, e).norm())
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial {
            num_vars: self.num_vars,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e.clone(), Complex::new(c.re.as_f64(), c.im.as_f64())))
                .collect(),
        }
    }
}

impl Polynomial<f64> {
    pub fn to_precision<T: Real>(&self) -> Polynomial<T> {
        Polynomial {
            num_vars: self.num_vars,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e.clone(), Complex::new(T::of(c.re), T::of(c.im))))
                .collect(),
        }
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
pub fn determinant<T: Real>(m: &[Vec<Polynomial<T>>]) -> Polynomial<T> {
    let k = m.len();
    assert!(m.iter().all(|row| row.len() == k), "square matrix");
    let num_vars = m[0][0].num_vars();
    if k == 1 {
        return m[0][0].clone();
    }
    let deg: u32 = m.iter().map(|row| row[0].degree()).sum();
    let mut acc = Polynomial::zero(num_vars, deg);
    for j in 0..k {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial<T>>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = m[0][j].mul(&determinant(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}
