use serde::{Deserialize, Serialize};

use super::SectionBasis;
use crate::curve::{r2_points, Curve};
use crate::elliptic::TorusPoint;
use crate::error::{Error, Result};
use crate::linalg::{svd, CMatrix, CVector, Svd, C64};
use crate::scalar::Real;

/// A linear form on `P^{n-1}`, i.e. a section of `L` in coordinates of the
/// fixed embedding basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub coeffs: Vec<C64>,
}

impl LinearForm {
    pub fn eval(&self, p: &CVector) -> C64 {
        self.coeffs.iter().zip(p.iter()).map(|(a, b)| a * b).sum()
    }
}

/// The `d1 × d2` matrix of linear forms `μ(e_i ⊗ f_j)` for a divisor pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoomMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<LinearForm>>,
    pub pair: (TorusPoint<f64>, TorusPoint<f64>),
    pub fit_residual: f64,
}

impl RoomMatrix {
    pub fn eval(&self, p: &CVector) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.entries[i][j].eval(p))
    }
}

impl Curve {
    /// A basis of `H⁰(E, O(D))` for any `D` of degree `d` with `σ(D) = x`.
    pub fn basis_of_sections(&self, d: usize, x: &TorusPoint<f64>) -> SectionBasis {
        SectionBasis::from_lift(d, x.z(), self.spec())
    }

    /// Integer `q` such that `e^{-2πi q z}·e_i·f_j` lies in `H⁰(L)` in the
    /// embedding trivialization.
    pub fn pair_correction(&self, b1: &SectionBasis, b2: &SectionBasis) -> Result<i64> {
        if b1.degree() + b2.degree() != self.n() {
            return Err(Error::InvalidInput(format!(
                "degrees {} + {} do not add up to n = {}",
                b1.degree(),
                b2.degree(),
                self.n()
            )));
        }
        let delta = b1.lift() + b2.lift() - self.l_lift();
        let ((_, q), residual) = self.lattice().nearest_lattice_vector(delta);
        if residual.norm() > self.tol().lattice_tol.max(1e-9) {
            return Err(Error::NotDivisorPair { residual: residual.norm() });
        }
        Ok(q)
    }

    fn product_correction(q: i64, z: C64) -> C64 {
        if q == 0 {
            return C64::new(1.0, 0.0);
        }
        crate::scalar::e2pii(z * -(q as f64))
    }

    /// Room's matrix with explicit linear-form entries, fitted by least
    /// squares against `4n` weighted sample evaluations.
    pub fn multiplication_matrix(&self, b1: &SectionBasis, b2: &SectionBasis) -> Result<RoomMatrix> {
        let q = self.pair_correction(b1, b2)?;
        let n = self.n();
        let pts = r2_points(self.lattice(), 4 * n, 1000);
        let line = self.line_basis();
        let mut a = CMatrix::zeros(pts.len(), n);
        let (d1, d2) = (b1.degree(), b2.degree());
        let mut rhs = CMatrix::zeros(pts.len(), d1 * d2);
        for (k, y) in pts.iter().enumerate() {
            let w = line.weight(*y);
            for (l, v) in line.eval(*y).into_iter().enumerate() {
                a[(k, l)] = v * w;
            }
            let g = Self::product_correction(q, *y) * w;
            let e = b1.eval(*y);
            let f = b2.eval(*y);
            for i in 0..d1 {
                for j in 0..d2 {
                    rhs[(k, i * d2 + j)] = e[i] * f[j] * g;
                }
            }
        }
        let Svd { u, s, v_t } = svd(&a);
        let top = s[0];
        let uh_b = u.adjoint() * &rhs;
        let mut coef = CMatrix::zeros(n, d1 * d2);
        for r in 0..s.len() {
            if s[r] > 1e-14 * top {
                let row = uh_b.row(r) / C64::new(s[r], 0.0);
                for col in 0..d1 * d2 {
                    for l in 0..n {
                        coef[(l, col)] += v_t[(r, l)].conj() * row[col];
                    }
                }
            }
        }
        let fitted = &a * &coef;
        let mut residual: f64 = 0.0;
        for col in 0..d1 * d2 {
            let b = rhs.column(col);
            let r = (fitted.column(col) - b).norm() / b.norm().max(f64::MIN_POSITIVE);
            residual = residual.max(r);
        }
        let tolerance = self.tol().rank_tol;
        if residual > tolerance {
            return Err(Error::FitResidual { residual, tolerance });
        }
        let entries = (0..d1)
            .map(|i| {
                (0..d2)
                    .map(|j| LinearForm { coeffs: coef.column(i * d2 + j).iter().copied().collect() })
                    .collect()
            })
            .collect();
        Ok(RoomMatrix {
            rows: d1,
            cols: d2,
            entries,
            pair: (b1.sum(), b2.sum()),
            fit_residual: residual.as_f64(),
        })
    }

    /// `Φ(D1, D2)_p` evaluated directly through the frame, without forming
    /// the linear forms.
    pub fn room_at(&self, b1: &SectionBasis, b2: &SectionBasis, p: &CVector) -> Result<CMatrix> {
        let q = self.pair_correction(b1, b2)?;
        let mut coords = self.frame_coords(p);
        for (a, y) in coords.iter_mut().zip(&self.frame.points) {
            *a *= Self::product_correction(q, *y);
        }
        Ok(room_product(&self.frame_values(b1), &self.weighted_frame_values(b2), &coords))
    }
}

/// `left · diag(coords) · rightᵀ`.
pub(crate) fn room_product(left: &CMatrix, right: &CMatrix, coords: &CVector) -> CMatrix {
    let mut scaled = left.clone();
    for (k, a) in coords.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= *a;
    }
    scaled * right.transpose()
}
