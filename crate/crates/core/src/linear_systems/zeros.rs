use rayon::prelude::*;

use super::SectionBasis;
use crate::curve::Curve;
use crate::elliptic::theta::odd_theta_with_derivative;
use crate::elliptic::Divisor;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const DEFAULT_ZERO_GRID: usize = 64;

/// Zeros closer than this (in the torus metric) are merged into one point.
const MERGE_TOL: f64 = 1e-6;

struct Deflation<'a> {
    basis: &'a SectionBasis,
    coeffs: &'a [C64],
    found: Vec<C64>,
    tau: C64,
    terms: usize,
}

impl Deflation<'_> {
    /// `|s(z)|·weight(z) / Π |θ₁(z - z_j)|·exp(-π Im(z - z_j)²/Im τ)`, doubly periodic.
    fn modulus(&self, z: C64, s_mod: f64) -> f64 {
        let mut m = s_mod;
        for zj in &self.found {
            let w = z - zj;
            let (t, _) = odd_theta_with_derivative(w, self.tau, self.terms);
            m /= t.norm() * (-std::f64::consts::PI * w.im * w.im / self.tau.im).exp();
        }
        m
    }

    /// Newton on the deflated function through its logarithmic derivative.
    fn newton(&self, mut z: C64) -> C64 {
        for _ in 0..80 {
            let (s, ds) = self.basis.section_with_derivative(self.coeffs, z);
            if s.norm() == 0.0 {
                return z;
            }
            let mut logd = ds / s;
            for zj in &self.found {
                let (t, dt) = odd_theta_with_derivative(z - zj, self.tau, self.terms);
                logd -= dt / t;
            }
            let step = -logd.inv();
            if !step.re.is_finite() || !step.im.is_finite() {
                return z;
            }
            let step = if step.norm() > 0.25 { step * (0.25 / step.norm()) } else { step };
            z += step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        z
    }
}

impl Curve {
    /// The zero divisor of `Σ coeffs_j e_j` for a section basis `e`.
    ///
    /// Zeros are found one at a time by grid-seeded Newton iteration on the
    /// section with the zeros already found divided out; the last zero is
    /// fixed by the sum condition and polished the same way.
    pub fn section_zeros(&self, basis: &SectionBasis, coeffs: &[C64]) -> Result<Divisor<f64>> {
        self.section_zeros_with_grid(basis, coeffs, DEFAULT_ZERO_GRID)
    }

    pub fn section_zeros_with_grid(&self, basis: &SectionBasis, coeffs: &[C64], grid: usize) -> Result<Divisor<f64>> {
        let d = basis.degree();
        if coeffs.len() != d || coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidInput("section coefficients must be a nonzero vector of length d".into()));
        }
        if d == 1 {
            return Ok(Divisor::single(basis.sum()));
        }
        let lattice = self.lattice();
        let cells: Vec<C64> = (0..grid * grid)
            .map(|k| lattice.from_coords((k / grid) as f64 / grid as f64, (k % grid) as f64 / grid as f64))
            .collect();
        let s_mod: Vec<f64> = cells
            .par_iter()
            .map(|z| basis.section(coeffs, *z).norm() * basis.weight(*z))
            .collect();
        let scale = s_mod.iter().copied().fold(0.0, f64::max);
        let root_tol = self.tol().root_tol;
        let mut defl = Deflation {
            basis,
            coeffs,
            found: Vec::with_capacity(d),
            tau: self.tau(),
            terms: self.tol().theta_terms,
        };
        let residual = |z: C64| basis.section(coeffs, z).norm() * basis.weight(z) / scale;

        for _ in 0..d - 1 {
            let mut ranked: Vec<(f64, C64)> = cells
                .par_iter()
                .zip(s_mod.par_iter())
                .map(|(z, m)| (defl.modulus(*z, *m), *z))
                .collect();
            ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let root = ranked
                .iter()
                .take(8)
                .map(|(_, seed)| defl.newton(*seed))
                .find(|z| residual(*z) < root_tol)
                .ok_or_else(|| {
                    Error::RootFinding(format!(
                        "no converged zero after {} of {d}; increase theta_terms or the zero grid",
                        defl.found.len()
                    ))
                })?;
            defl.found.push(root);
        }
        let partial: C64 = defl.found.iter().sum();
        let last = defl.newton(basis.lift() - partial);
        let last_res = residual(last);
        if last_res >= root_tol {
            return Err(Error::RootFinding(format!(
                "sum-determined zero has residual {last_res:.3e}; found {} zeros by search",
                d - 1
            )));
        }
        defl.found.push(last);

        let points = defl.found.iter().map(|z| lattice.reduce(*z));
        let divisor = Divisor::from_points(points, lattice, MERGE_TOL);
        if divisor.degree() != d || !lattice.eq(&divisor.sum(lattice), &basis.sum(), 1e-7) {
            return Err(Error::RootFinding(format!(
                "zero divisor has degree {} (expected {d}) or wrong sum",
                divisor.degree()
            )));
        }
        Ok(divisor)
    }
}
