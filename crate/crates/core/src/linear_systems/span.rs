use crate::curve::Curve;
use crate::elliptic::Divisor;
use crate::linalg::{CMatrix, CVector, Subspace};

impl Curve {
    /// Generators of the scheme-theoretic span: at a point of multiplicity
    /// `m`, the evaluation vector and its first `m - 1` z-derivatives.
    pub fn span_generators(&self, divisor: &Divisor<f64>) -> CMatrix {
        let cols: Vec<CVector> = divisor
            .parts()
            .iter()
            .flat_map(|(p, m)| self.embed_derivatives(p.z(), *m as usize - 1))
            .collect();
        let mut g = CMatrix::zeros(self.n(), cols.len());
        for (j, col) in cols.iter().enumerate() {
            g.set_column(j, col);
        }
        g
    }

    /// The linear span `D̄ ⊂ P^{n-1}` as a subspace of `C^n`.
    pub fn span(&self, divisor: &Divisor<f64>) -> Subspace {
        Subspace::span_of_normalized(&self.span_generators(divisor), self.tol().rank_tol)
    }

    /// Sections of `L` vanishing on `D`, as coefficient vectors.
    pub fn forms_vanishing_on(&self, divisor: &Divisor<f64>) -> Subspace {
        self.span(divisor).annihilator(self.tol().rank_tol)
    }

    /// `ξ^⊥`: the hyperplane of sections of `L` vanishing at the point `p`.
    pub fn xi_perp(&self, p: &CVector) -> Subspace {
        let mut g = CMatrix::zeros(p.len(), 1);
        g.set_column(0, p);
        Subspace::span_of_normalized(&g, self.tol().rank_tol).annihilator(self.tol().rank_tol)
    }

    /// Projective point of `span(D1) ∩ span(D2)` (possibly empty).
    pub fn intersect_spans(&self, d1: &Divisor<f64>, d2: &Divisor<f64>) -> Subspace {
        self.span(d1).intersect(&self.span(d2), self.intersection_tol())
    }

    pub(crate) fn intersection_tol(&self) -> f64 {
        (self.tol().rank_tol * 10.0).sqrt().min(1e-3)
    }
}
