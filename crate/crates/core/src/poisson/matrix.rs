use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::gaussian_vector;
use crate::linalg::{gap_rank, singular_values, CMatrix, CVector, RankDecision, Subspace, C64};
use crate::poly::{monomials, Polynomial};

/// Skew matrix of quadrics `{x_i, x_j} = Ω_ij`, stored as the strict upper
/// triangle in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonMatrix {
    n: usize,
    upper: Vec<Polynomial<f64>>,
}

pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl PoissonMatrix {
    pub fn from_upper(n: usize, upper: Vec<Polynomial<f64>>) -> Self {
        assert_eq!(upper.len(), n * (n - 1) / 2, "upper triangle size");
        assert!(upper.iter().all(|q| q.degree() == 2 && q.num_vars() == n), "entries must be quadrics in n variables");
        Self { n, upper }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[Polynomial<f64>] {
        &self.upper
    }

    /// `Ω_ij` with its sign; `None` on the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> Option<(f64, &Polynomial<f64>)> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Some((1.0, &self.upper[pair_index(self.n, i, j)])),
            std::cmp::Ordering::Greater => Some((-1.0, &self.upper[pair_index(self.n, j, i)])),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Largest coefficient becomes 1.
    pub fn normalized(&self) -> Self {
        let top = self
            .upper
            .iter()
            .flat_map(|q| q.terms().iter().map(|(_, c)| *c))
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        Self { n: self.n, upper: self.upper.iter().map(|q| q.scale(top.inv())).collect() }
    }

    pub fn coefficient_vector(&self) -> Vec<C64> {
        let basis = monomials(self.n, 2);
        self.upper.iter().flat_map(|q| q.coefficient_vector(&basis)).collect()
    }

    /// Every coefficient of every entry moved by `size` times a standard
    /// complex Gaussian.
    pub fn perturbed<R: Rng + ?Sized>(&self, size: f64, rng: &mut R) -> Self {
        let basis = monomials(self.n, 2);
        let upper = self
            .upper
            .iter()
            .map(|q| {
                let noise = gaussian_vector(basis.len(), rng) * C64::new(size, 0.0);
                let coeffs: Vec<C64> = q.coefficient_vector(&basis).iter().zip(noise.iter()).map(|(a, b)| a + b).collect();
                Polynomial::from_coefficients(self.n, 2, &basis, &coeffs)
            })
            .collect();
        Self { n: self.n, upper }
    }

    /// `M_ij = Ω_ij(p)`.
    pub fn bracket_eval(&self, p: &CVector) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.upper[pair_index(self.n, i, j)].eval(p.as_slice());
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    /// `max_ij Σ |c| |p^β|` over the entries.
    pub fn abs_scale(&self, p: &CVector) -> f64 {
        self.upper.iter().map(|q| q.abs_eval(p.as_slice())).fold(0.0, f64::max)
    }

    /// Rank of `α ↦ M(p) α mod p` on `Ann(p) = {α : Σ α_i p_i = 0}`.
    pub fn poisson_rank(&self, p: &CVector, rank_tol: f64) -> RankDecision {
        let p = p.normalize();
        let m = self.bracket_eval(&p);
        let ann = Subspace::span_of(&CMatrix::from_column_slice(self.n, 1, p.map(|z| z.conj()).as_slice()), 1e-12)
            .complement(1e-12);
        let proj = CMatrix::identity(self.n, self.n) - &p * p.adjoint();
        let induced = proj * m * ann.basis();
        gap_rank(&singular_values(&induced), self.abs_scale(&p), rank_tol)
    }

    /// `max_ijk |Σ_l Ω_il ∂_l Ω_jk + cyclic|(p)`, relative to the same sum
    /// taken over absolute values of the terms.
    pub fn jacobi_residual(&self, p: &CVector) -> f64 {
        let n = self.n;
        let pt = p.as_slice();
        let val = |i: usize, j: usize| -> (C64, f64) {
            match self.entry(i, j) {
                Some((s, q)) => (q.eval(pt) * s, q.abs_eval(pt)),
                None => (C64::new(0.0, 0.0), 0.0),
            }
        };
        // d[l][(i, j)] = ∂_l Ω_ij(p) for i < j
        let grads: Vec<Vec<(C64, f64)>> = self
            .upper
            .iter()
            .map(|q| q.gradient().iter().map(|g| (g.eval(pt), g.abs_eval(pt))).collect())
            .collect();
        let dval = |l: usize, i: usize, j: usize| -> (C64, f64) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => grads[pair_index(n, i, j)][l],
                std::cmp::Ordering::Greater => {
                    let (v, a) = grads[pair_index(n, j, i)][l];
                    (-v, a)
                }
                std::cmp::Ordering::Equal => (C64::new(0.0, 0.0), 0.0),
            }
        };
        let vals: Vec<Vec<(C64, f64)>> = (0..n).map(|i| (0..n).map(|j| val(i, j)).collect()).collect();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut sum = C64::new(0.0, 0.0);
                    let mut abs = 0.0;
                    for l in 0..n {
                        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            let (w, wa) = vals[a][l];
                            let (dv, da) = dval(l, b, c);
                            sum += w * dv;
                            abs += wa * da;
                        }
                    }
                    worst = worst.max(sum.norm());
                    scale = scale.max(abs);
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `max_j |Σ_i ∂_i F Ω_ij|(p)` relative to the absolute term sizes, worst
    /// over the given forms.
    pub fn casimir_residual(&self, forms: &[Polynomial<f64>], p: &CVector) -> f64 {
        let pt = p.as_slice();
        let m = self.bracket_eval(p);
        let m_abs: Vec<Vec<f64>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j).map_or(0.0, |(_, q)| q.abs_eval(pt))).collect())
            .collect();
        forms
            .iter()
            .map(|f| {
                let grad: Vec<(C64, f64)> = f.gradient().iter().map(|g| (g.eval(pt), g.abs_eval(pt))).collect();
                let mut worst: f64 = 0.0;
                let mut scale: f64 = 0.0;
                for j in 0..self.n {
                    let mut sum = C64::new(0.0, 0.0);
                    let mut abs = 0.0;
                    for (i, (g, ga)) in grad.iter().enumerate() {
                        sum += g * m[(i, j)];
                        abs += ga * m_abs[i][j];
                    }
                    worst = worst.max(sum.norm());
                    scale = scale.max(abs);
                }
                if scale == 0.0 {
                    0.0
                } else {
                    worst / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// Projective distance between two brackets: `1 - |⟨a, b⟩| / (|a| |b|)`
    /// on coefficient vectors.
    pub fn projective_distance(&self, other: &Self) -> f64 {
        let a = CVector::from_vec(self.coefficient_vector());
        let b = CVector::from_vec(other.coefficient_vector());
        let c = a.dotc(&b).norm() / (a.norm() * b.norm());
        (1.0 - c).max(0.0)
    }
}
