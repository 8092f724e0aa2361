use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::elliptic::theta::level_thetas;
use crate::elliptic::{CurveSpec, Lattice, TorusPoint, THETA_CONVENTION};
use crate::linalg::C64;

/// `(1 + tau) / 2`, the zero of `θ[0,0]`.
pub(crate) fn half_period(tau: C64) -> C64 {
    (tau + 1.0) * 0.5
}

/// A basis of `H⁰(E, O(D))` for `deg D = d` and `σ(D) = x`, realized as the
/// level-`d` theta functions translated so that every section's zeros sum to
/// `x` (for the chosen complex lift of `x`).
///
/// All bases built from lifts whose sums agree exactly share a factor of
/// automorphy, which is what makes products land in the target space without
/// correction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectionBasis {
    degree: usize,
    sum: TorusPoint<f64>,
    lift: C64,
    shift: C64,
    tau: C64,
    terms: usize,
    scales: Vec<C64>,
    convention_tag: String,
}

impl SectionBasis {
    pub fn from_lift(d: usize, lift: C64, spec: &CurveSpec) -> Self {
        assert!(d >= 1, "section basis degree must be positive");
        let lattice = Lattice::new(spec.tau).expect("valid spec");
        let shift = (lift - half_period(spec.tau) * d as f64) / d as f64;
        Self {
            degree: d,
            sum: lattice.reduce(lift),
            lift,
            shift,
            tau: spec.tau,
            terms: spec.tolerances.theta_terms,
            scales: vec![Complex::new(1.0, 0.0); d],
            convention_tag: THETA_CONVENTION.to_string(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sum(&self) -> TorusPoint<f64> {
        self.sum
    }

    pub fn lift(&self) -> C64 {
        self.lift
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn convention_tag(&self) -> &str {
        &self.convention_tag
    }

    /// Same basis with element `index` multiplied by `factor`.
    pub fn with_scaled(mut self, index: usize, factor: C64) -> Self {
        self.scales[index] *= factor;
        self
    }

    /// `out[k][j]` = k-th z-derivative of basis element `j` at `z`.
    pub fn eval_orders(&self, z: C64, max_order: usize) -> Vec<Vec<C64>> {
        let mut vals = level_thetas(self.degree, self.tau, z - self.shift, max_order, self.terms)
            .expect("theta window validated by ToleranceConfig");
        for row in vals.iter_mut() {
            for (v, s) in row.iter_mut().zip(&self.scales) {
                *v *= s;
            }
        }
        vals
    }

    pub fn eval(&self, z: C64) -> Vec<C64> {
        self.eval_orders(z, 0).swap_remove(0)
    }

    pub fn section(&self, coeffs: &[C64], z: C64) -> C64 {
        self.eval(z).iter().zip(coeffs).map(|(e, c)| e * c).sum()
    }

    /// Value and first derivative of `Σ coeffs_j e_j`.
    pub fn section_with_derivative(&self, coeffs: &[C64], z: C64) -> (C64, C64) {
        let v = self.eval_orders(z, 1);
        let dot = |row: &Vec<C64>| row.iter().zip(coeffs).map(|(e, c)| e * c).sum::<C64>();
        (dot(&v[0]), dot(&v[1]))
    }

    /// Gaussian factor making `|s(z)|·weight(z)` doubly periodic.
    pub fn weight(&self, z: C64) -> f64 {
        let y = z.im - self.shift.im;
        (-std::f64::consts::PI * self.degree as f64 * y * y / self.tau.im).exp()
    }
}
