//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Singular values a rank decision must separate by at least this factor.
pub const GAP_RATIO: f64 = 1e3;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Thin SVD `m = u · diag(s) · v_t`, singular values descending.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_t: CMatrix,
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// Decompositions go through faer: nalgebra's complex SVD loses accuracy on
// rank-deficient input.
pub fn svd(m: &CMatrix) -> Svd {
    let f = to_faer(m).thin_svd().expect("SVD iteration converges on finite input");
    Svd {
        u: from_faer(f.U()),
        s: f.S().column_vector().iter().map(|z| z.re).collect(),
        v_t: from_faer(f.V()).adjoint(),
    }
}

/// Singular values padded with zeros to `ncols`, and the full right
/// singular basis as rows of `v_t` (`ncols × ncols`).
pub fn svd_right(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let f = to_faer(m).svd().expect("SVD iteration converges on finite input");
    let mut s: Vec<f64> = f.S().column_vector().iter().map(|z| z.re).collect();
    s.resize(m.ncols(), 0.0);
    (s, from_faer(f.V()).adjoint())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD iteration converges on finite input")
}

/// Eigenvalues of a square matrix.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    to_faer(m).eigenvalues().expect("eigenvalue iteration converges on finite input")
}

/// Moore-Penrose pseudo-inverse, truncating below `rcond · σ_max`.
pub fn pseudo_inverse(m: &CMatrix, rcond: f64) -> CMatrix {
    let Svd { u, s, v_t } = svd(m);
    let top = s.first().copied().unwrap_or(0.0);
    let mut inv_s = CMatrix::zeros(s.len(), s.len());
    for (i, v) in s.iter().enumerate() {
        if *v > rcond * top {
            inv_s[(i, i)] = C64::new(1.0 / v, 0.0);
        }
    }
    v_t.adjoint() * inv_s * u.adjoint()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &CMatrix, b: &CVector, rcond: f64) -> CVector {
    let b = CMatrix::from_column_slice(b.len(), 1, b.as_slice());
    (pseudo_inverse(a, rcond) * b).column(0).into_owned()
}

/// Outcome of a thresholded rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankDecision {
    Exact(usize),
    /// Some singular values fall inside the band between "zero" and
    /// "nonzero"; the rank lies in `lo..=hi`.
    Ambiguous { lo: usize, hi: usize },
}

impl RankDecision {
    pub fn exact(self) -> Option<usize> {
        match self {
            RankDecision::Exact(r) => Some(r),
            RankDecision::Ambiguous { .. } => None,
        }
    }
}

/// Values `≤ tol·scale` count as zero, values `≥ GAP_RATIO·tol·scale` as
/// nonzero; anything between makes the decision ambiguous.
pub fn gap_rank(s: &[f64], scale: f64, tol: f64) -> RankDecision {
    let zero = tol * scale;
    let nonzero = GAP_RATIO * zero;
    let hi = s.iter().filter(|v| **v > zero).count();
    let lo = s.iter().filter(|v| **v >= nonzero).count();
    if lo == hi {
        RankDecision::Exact(hi)
    } else {
        RankDecision::Ambiguous { lo, hi }
    }
}

/// Orthonormal basis of the right null space, taking the `dim` smallest
/// singular directions. Returns the basis (columns) and the full spectrum.
pub fn null_space_dim(m: &CMatrix, dim: usize) -> (CMatrix, Vec<f64>) {
    let cols = m.ncols();
    let (s, v_t) = svd_right(m);
    let mut basis = CMatrix::zeros(cols, dim);
    for (j, row) in (cols - dim..cols).enumerate() {
        for i in 0..cols {
            basis[(i, j)] = v_t[(row, i)].conj();
        }
    }
    (basis, s)
}

/// QR-compress a tall matrix before the SVD; singular values are unchanged.
pub fn compress_tall(m: &CMatrix) -> CMatrix {
    if m.nrows() <= m.ncols() * 2 {
        return m.clone();
    }
    from_faer(to_faer(m).qr().thin_R())
}

pub fn hermitian_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &CVector) -> CVector {
    let n = hermitian_norm(v);
    v / C64::new(n, 0.0)
}

/// Bilinear pairing `Σ a_i b_i` (no conjugation).
pub fn pair(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Chordal distance between the projective points `[a]` and `[b]`.
pub fn chordal_distance(a: &CVector, b: &CVector) -> f64 {
    let a = normalized(a);
    let b = normalized(b);
    let proj = &b * a.dotc(&b).conj();
    hermitian_norm(&(&a - proj))
}

/// A linear subspace of `C^ambient`, stored by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: CMatrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self { ambient, basis: CMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Self { ambient, basis: CMatrix::identity(ambient, ambient) }
    }

    /// Column span of `generators`, with numerical rank decided relative to
    /// the largest singular value.
    pub fn span_of(generators: &CMatrix, rank_tol: f64) -> Self {
        let ambient = generators.nrows();
        if generators.ncols() == 0 {
            return Self::zero(ambient);
        }
        let Svd { u, s, .. } = svd(generators);
        let top = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().filter(|v| **v > rank_tol * top).count();
        Self { ambient, basis: u.columns(0, rank).into_owned() }
    }

    /// Column span, normalizing each generator first.
    pub fn span_of_normalized(generators: &CMatrix, rank_tol: f64) -> Self {
        let mut g = generators.clone();
        for mut col in g.column_iter_mut() {
            let n = col.norm();
            if n > 0.0 {
                col /= C64::new(n, 0.0);
            }
        }
        Self::span_of(&g, rank_tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Projective dimension; `-1` for the empty subspace.
    pub fn projective_dim(&self) -> isize {
        self.dim() as isize - 1
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Hermitian orthogonal complement.
    pub fn complement(&self, rank_tol: f64) -> Self {
        let p = CMatrix::identity(self.ambient, self.ambient) - self.projector();
        Self::span_of(&p, rank_tol.max(1e-12))
    }

    pub fn conj(&self) -> Self {
        Self { ambient: self.ambient, basis: self.basis.map(|z| z.conj()) }
    }

    /// `{c : Σ c_i v_i = 0 for all v in self}`.
    pub fn annihilator(&self, rank_tol: f64) -> Self {
        self.conj().complement(rank_tol)
    }

    /// Relative residual of `v` after projection onto the subspace.
    pub fn residual(&self, v: &CVector) -> f64 {
        let nv = hermitian_norm(v);
        if nv == 0.0 {
            return 0.0;
        }
        let proj = &self.basis * (self.basis.adjoint() * v);
        hermitian_norm(&(v - proj)) / nv
    }

    pub fn contains(&self, v: &CVector, tol: f64) -> bool {
        self.residual(v) <= tol
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        other
            .basis
            .column_iter()
            .all(|col| self.residual(&col.into_owned()) <= tol)
    }

    pub fn join(&self, other: &Subspace, rank_tol: f64) -> Self {
        let mut g = CMatrix::zeros(self.ambient, self.dim() + other.dim());
        g.columns_mut(0, self.dim()).copy_from(&self.basis);
        g.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Self::span_of(&g, rank_tol)
    }

    /// Intersection from the null space of `[A | -B]`; both bases are
    /// orthonormal so the singular values are on the unit scale.
    pub fn intersect(&self, other: &Subspace, rank_tol: f64) -> Self {
        let (ka, kb) = (self.dim(), other.dim());
        if ka == 0 || kb == 0 {
            return Self::zero(self.ambient);
        }
        let mut m = CMatrix::zeros(self.ambient, ka + kb);
        m.view_mut((0, 0), (self.ambient, ka)).copy_from(&self.basis);
        m.view_mut((0, ka), (self.ambient, kb)).copy_from(&(-&other.basis));
        let (s, v_t) = svd_right(&m);
        let null: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= rank_tol).collect();
        let mut gens = CMatrix::zeros(self.ambient, null.len());
        for (j, &row) in null.iter().enumerate() {
            let coeffs: CVector = CVector::from_iterator(ka, (0..ka).map(|i| v_t[(row, i)].conj()));
            gens.set_column(j, &(&self.basis * coeffs));
        }
        Self::span_of_normalized(&gens, 1e-6)
    }

    /// Spectral norm of the difference of orthogonal projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient != other.ambient {
            return f64::INFINITY;
        }
        singular_values(&(self.projector() - other.projector()))
            .first()
            .copied()
            .unwrap_or(0.0)
    }
}
