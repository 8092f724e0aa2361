use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{pair_index, PoissonMatrix};
use crate::curve::Curve;
use crate::elliptic::random_point;
use crate::error::{Error, Result};
use crate::linalg::{compress_tall, gap_rank, null_space_dim, pseudo_inverse, singular_values, CMatrix, CVector, RankDecision, C64};
use crate::poly::{monomial_value, monomials, Exponent, Polynomial};
use crate::secant::SecantPencil;

/// Required ratio between the last nonzero and the zero singular value.
pub const NULL_GAP: f64 = 1e6;

/// Default oversampling of the interpolation system.
pub const DEFAULT_OVERSAMPLING: f64 = 2.0;

/// Spectrum of a homogeneous solve with the gap around its null space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSpectrum {
    pub singular_values: Vec<f64>,
    /// `σ_{N-1} / σ_N`.
    pub gap: f64,
}

impl NullSpectrum {
    fn new(singular_values: Vec<f64>) -> Self {
        let k = singular_values.len();
        let gap = if k >= 2 { singular_values[k - 2] / singular_values[k - 1].max(f64::MIN_POSITIVE) } else { f64::INFINITY };
        Self { singular_values, gap }
    }
}

/// The secant hypersurfaces a bracket is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parity", rename_all = "snake_case")]
pub enum SecantForms {
    /// `F = 0` cuts out `Sec_r` for `n = 2r + 1`.
    Odd { f: Polynomial<f64> },
    Even { pencil: SecantPencil },
}

impl SecantForms {
    pub fn forms(&self) -> Vec<Polynomial<f64>> {
        match self {
            Self::Odd { f } => vec![f.clone()],
            Self::Even { pencil } => vec![pencil.f1.clone(), pencil.f2.clone()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub interpolation: Option<NullSpectrum>,
    pub syzygy: NullSpectrum,
    pub seconds: f64,
}

/// A bracket together with the forms it was solved from.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    pub forms: SecantForms,
    pub omega: PoissonMatrix,
    pub diagnostics: Diagnostics,
}

fn exponent_index(basis: &[Exponent]) -> HashMap<&[u32], usize> {
    basis.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect()
}

/// Unit null vector of `m` after checking that the null space is one-dimensional.
fn unique_null_vector(m: &CMatrix, rank_tol: f64) -> Result<(CVector, NullSpectrum)> {
    let cols = m.ncols();
    let r = compress_tall(m);
    let (basis, s) = null_space_dim(&r, 1);
    let spectrum = NullSpectrum::new(s.clone());
    let rank = gap_rank(&s, s[0], rank_tol);
    if rank != RankDecision::Exact(cols - 1) || spectrum.gap < NULL_GAP {
        let dim = match rank {
            RankDecision::Exact(k) => cols - k,
            RankDecision::Ambiguous { lo, .. } => cols - lo,
        };
        let tail = s[s.len().saturating_sub(4)..].to_vec();
        return Err(Error::NullSpace { dim, expected: 1, spectrum: tail });
    }
    Ok((basis.column(0).into_owned(), spectrum))
}

impl Curve {
    /// The degree-`n` form vanishing on `Sec_r` for odd `n = 2r + 1`, by
    /// interpolation through `oversampling × C(2n-1, n-1)` points of `Sec_r`.
    pub fn top_secant_equation<R: Rng + ?Sized>(
        &self,
        oversampling: f64,
        rng: &mut R,
    ) -> Result<(Polynomial<f64>, NullSpectrum)> {
        if self.spec().is_even() {
            return Err(Error::InvalidInput("the top secant equation exists for odd n only".into()));
        }
        let n = self.n();
        let r = n / 2;
        let basis = monomials(n, n as u32);
        let rows = ((basis.len() as f64) * oversampling.max(1.0)).ceil() as usize;
        let seeds: Vec<u64> = (0..rows).map(|_| rng.random()).collect();
        let samples: Vec<Vec<C64>> = seeds
            .par_iter()
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let x = random_point(self.lattice(), &mut rng);
                let p = self.sample_partial_secant(r, &x, false, &mut rng)?;
                let table: Vec<Vec<C64>> = p
                    .iter()
                    .map(|z| (0..=n).scan(C64::new(1.0, 0.0), |acc, _| {
                        let v = *acc;
                        *acc *= z;
                        Some(v)
                    }).collect())
                    .collect();
                Ok(basis.iter().map(|e| monomial_value(&table, e)).collect())
            })
            .collect::<Result<_>>()?;
        let m = CMatrix::from_fn(rows, basis.len(), |i, j| samples[i][j]);
        let (v, spectrum) = unique_null_vector(&m, self.tol().rank_tol)?;
        let f = Polynomial::from_coefficients(n, n as u32, &basis, v.as_slice()).normalized();
        Ok((f, spectrum))
    }

    /// Builds the secant forms and solves for the bracket.
    pub fn poisson_structure<R: Rng + ?Sized>(&self, oversampling: f64, rng: &mut R) -> Result<PoissonStructure> {
        let start = Instant::now();
        let (forms, interpolation) = if self.spec().is_even() {
            let mut pencil = self.secant_pencil(rng)?;
            pencil.f1 = pencil.f1.normalized();
            pencil.f2 = pencil.f2.normalized();
            (SecantForms::Even { pencil }, None)
        } else {
            let (f, spectrum) = self.top_secant_equation(oversampling, rng)?;
            (SecantForms::Odd { f }, Some(spectrum))
        };
        let (omega, syzygy) = syzygy_poisson_matrix(self.n(), &forms.forms(), self.tol().rank_tol)?;
        Ok(PoissonStructure {
            forms,
            omega,
            diagnostics: Diagnostics { interpolation, syzygy, seconds: start.elapsed().as_secs_f64() },
        })
    }
}

/// The skew matrix of quadrics with `Σ_i ∂_i F Ω_ij = 0` for every form `F`,
/// unique up to scale.
pub fn syzygy_poisson_matrix(
    n: usize,
    forms: &[Polynomial<f64>],
    rank_tol: f64,
) -> Result<(PoissonMatrix, NullSpectrum)> {
    if forms.is_empty() || forms.iter().any(|f| f.num_vars() != n || f.degree() < 1) {
        return Err(Error::InvalidInput("syzygy forms must be nonconstant forms in n variables".into()));
    }
    let quad = monomials(n, 2);
    let pairs = n * (n - 1) / 2;
    let cols = pairs * quad.len();

    // One block of rows per (form, column index j).
    let mut blocks = Vec::new();
    let mut offset = 0;
    for f in forms {
        let target = monomials(n, f.degree() + 1);
        let len = target.len();
        blocks.push((f.gradient(), target, offset));
        offset += n * len;
    }
    let mut m = CMatrix::zeros(offset, cols);
    for (grad, target, base) in &blocks {
        let index = exponent_index(target);
        let len = target.len();
        let mut add = |block_col: usize, g: &Polynomial<f64>, q: &[u32], col: usize, sign: f64| {
            for (e, c) in g.terms() {
                let prod: Vec<u32> = e.iter().zip(q).map(|(a, b)| a + b).collect();
                let row = base + block_col * len + index[prod.as_slice()];
                m[(row, col)] += c * sign;
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                for (k, q) in quad.iter().enumerate() {
                    let col = pair_index(n, i, j) * quad.len() + k;
                    // Ω_ij enters column j with ∂_i F, and column i as -Ω_ij with ∂_j F.
                    add(j, &grad[i], q, col, 1.0);
                    add(i, &grad[j], q, col, -1.0);
                }
            }
        }
    }
    let (v, spectrum) = unique_null_vector(&m, rank_tol)?;
    let upper = (0..pairs)
        .map(|k| Polynomial::from_coefficients(n, 2, &quad, &v.as_slice()[k * quad.len()..(k + 1) * quad.len()]))
        .collect();
    Ok((PoissonMatrix::from_upper(n, upper).normalized(), spectrum))
}

/// Symmetric matrix `A` with `q(p) = pᵀ A p`.
pub fn quadric_matrix(q: &Polynomial<f64>) -> CMatrix {
    assert_eq!(q.degree(), 2, "quadric expected");
    let n = q.num_vars();
    let mut a = CMatrix::zeros(n, n);
    for (e, c) in q.terms() {
        let idx: Vec<usize> = e.iter().enumerate().flat_map(|(i, k)| std::iter::repeat_n(i, *k as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            a[(i, i)] += c;
        } else {
            a[(i, j)] += c * 0.5;
            a[(j, i)] += c * 0.5;
        }
    }
    a
}

/// A member `F1 + t F2` of a pencil of quadrics whose matrix drops rank.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularMember {
    /// `None` for the member `F2` itself.
    pub t: Option<C64>,
    pub rank: RankDecision,
    pub vertex: CVector,
}

/// Singular members of the pencil spanned by two quadrics: the roots of
/// `det(A1 + t A2)`, each kept when the gap rule reports a rank drop.
pub fn singular_quadrics(f1: &Polynomial<f64>, f2: &Polynomial<f64>, rank_tol: f64) -> Vec<SingularMember> {
    let (a1, a2) = (quadric_matrix(f1), quadric_matrix(f2));
    let n = a1.nrows();
    let full = RankDecision::Exact(n);
    let mut out = Vec::new();
    let mut member = |t: Option<C64>, b: CMatrix| {
        let s = singular_values(&b);
        let rank = gap_rank(&s, s[0], rank_tol);
        if rank != full {
            let (v, _) = null_space_dim(&b, 1);
            out.push(SingularMember { t, rank, vertex: v.column(0).into_owned() });
        }
    };
    let s2 = singular_values(&a2);
    if gap_rank(&s2, s2[0], rank_tol) != full {
        member(None, a2.clone());
    }
    let companion = -(pseudo_inverse(&a2, 1e-14) * &a1);
    for t in crate::linalg::eigenvalues(&companion) {
        member(Some(t), &a1 + &a2 * t);
    }
    out
}
