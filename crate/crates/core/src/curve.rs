//! The embedded curve `E ⊂ P^{n-1}` together with the numerical frames every
//! downstream computation shares.

use std::sync::OnceLock;

use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::elliptic::{CurveSpec, Lattice, TorusPoint};
use crate::error::{Error, Result};
use crate::linalg::{c, normalized, pseudo_inverse, CMatrix, CVector, C64};
use crate::linear_systems::SectionBasis;

/// Default side of the square grid over the fundamental parallelogram used
/// to seed searches in the sum parameter `x`.
pub const DEFAULT_X_GRID: usize = 48;

/// Low-discrepancy points `frac(0.5 + m·g1) + frac(0.5 + m·g2)·tau`.
pub(crate) fn r2_points(lattice: &Lattice<f64>, count: usize, offset: usize) -> Vec<C64> {
    const G1: f64 = 0.754_877_666_246_692_8;
    const G2: f64 = 0.569_840_290_998_053_3;
    (0..count)
        .map(|m| {
            let k = (m + offset + 1) as f64;
            let s = (0.5 + k * G1).fract();
            let t = (0.5 + k * G2).fract();
            lattice.from_coords(s, t)
        })
        .collect()
}

/// Evaluation frame: points `y_m` with weighted evaluation vectors spanning
/// `C^n`. A projective point `p` is written as `p = Σ a_m w_m ev(y_m)`, which
/// turns the pairing of any section `s ∈ H⁰(L)` with `p` into
/// `Σ a_m w_m s(y_m)`.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
    pub pinv: CMatrix,
}

/// Per-degree table of weighted basis values over the x-grid.
pub(crate) struct LevelTable {
    pub lifts: Vec<C64>,
    pub left: Vec<CMatrix>,
    pub right: Vec<CMatrix>,
}

pub struct Curve {
    spec: CurveSpec,
    lattice: Lattice<f64>,
    line: SectionBasis,
    pub(crate) frame: Frame,
    x_grid: usize,
    levels: Vec<OnceLock<LevelTable>>,
    curve_grid: OnceLock<Vec<(C64, CVector)>>,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Curve").field("spec", &self.spec).finish_non_exhaustive()
    }
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        Self::with_grid(spec, DEFAULT_X_GRID)
    }

    pub fn with_grid(spec: CurveSpec, x_grid: usize) -> Result<Self> {
        let lattice = spec.lattice();
        let line = SectionBasis::from_lift(spec.n, spec.l_sum.z(), &spec);
        let n = spec.n;
        let points = r2_points(&lattice, 2 * n, 0);
        let weights: Vec<f64> = points.iter().map(|y| line.weight(*y)).collect();
        let mut v = CMatrix::zeros(n, points.len());
        for (m, y) in points.iter().enumerate() {
            let ev = line.eval(*y);
            for k in 0..n {
                v[(k, m)] = ev[k] * weights[m];
            }
        }
        let pinv = pseudo_inverse(&v, 1e-13);
        if pinv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("evaluation frame is singular".into()));
        }
        let levels = (0..=n / 2).map(|_| OnceLock::new()).collect();
        Ok(Self {
            spec,
            lattice,
            line,
            frame: Frame { points, weights, pinv },
            x_grid: x_grid.max(4),
            levels,
            curve_grid: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn lattice(&self) -> &Lattice<f64> {
        &self.lattice
    }

    pub fn tau(&self) -> C64 {
        self.spec.tau
    }

    /// The fixed complex lift of `σ(H)`.
    pub fn l_lift(&self) -> C64 {
        self.spec.l_sum.z()
    }

    /// The embedding basis of `H⁰(E, L)`.
    pub fn line_basis(&self) -> &SectionBasis {
        &self.line
    }

    pub fn tol(&self) -> &crate::elliptic::ToleranceConfig {
        &self.spec.tolerances
    }

    pub fn x_grid(&self) -> usize {
        self.x_grid
    }

    /// Unnormalized evaluation vector of the embedding basis at a lift.
    pub fn embed_raw(&self, z: C64) -> CVector {
        CVector::from_vec(self.line.eval(z))
    }

    /// The image of `x` in `P^{n-1}`, normalized to unit length.
    pub fn embed(&self, x: &TorusPoint<f64>) -> CVector {
        normalized(&self.embed_raw(x.z()))
    }

    /// Evaluation vector and its first `order` z-derivatives at a lift.
    pub fn embed_derivatives(&self, z: C64, order: usize) -> Vec<CVector> {
        self.line
            .eval_orders(z, order)
            .into_iter()
            .map(CVector::from_vec)
            .collect()
    }

    /// Frame coefficients `a` with `p = Σ a_m w_m ev(y_m)`.
    pub(crate) fn frame_coords(&self, p: &CVector) -> CVector {
        &self.frame.pinv * p
    }

    /// Weighted basis values at the frame points, `d × M`.
    pub(crate) fn frame_values(&self, basis: &SectionBasis) -> CMatrix {
        let m = self.frame.points.len();
        let mut out = CMatrix::zeros(basis.degree(), m);
        for (k, y) in self.frame.points.iter().enumerate() {
            for (i, v) in basis.eval(*y).into_iter().enumerate() {
                out[(i, k)] = v;
            }
        }
        out
    }

    /// Basis values and first derivatives at the frame points, `d × M` each.
    pub(crate) fn frame_values_with_derivative(&self, basis: &SectionBasis) -> (CMatrix, CMatrix) {
        let m = self.frame.points.len();
        let mut val = CMatrix::zeros(basis.degree(), m);
        let mut der = CMatrix::zeros(basis.degree(), m);
        for (k, y) in self.frame.points.iter().enumerate() {
            let orders = basis.eval_orders(*y, 1);
            for i in 0..basis.degree() {
                val[(i, k)] = orders[0][i];
                der[(i, k)] = orders[1][i];
            }
        }
        (val, der)
    }

    /// Frame weights as a slice, aligned with the frame points.
    pub(crate) fn frame_weights(&self) -> &[f64] {
        &self.frame.weights
    }

    pub(crate) fn x_grid_lifts(&self) -> Vec<C64> {
        let g = self.x_grid;
        let mut out = Vec::with_capacity(g * g);
        for i in 0..g {
            for j in 0..g {
                out.push(self.lattice.from_coords(i as f64 / g as f64, j as f64 / g as f64));
            }
        }
        out
    }

    pub(crate) fn level_table(&self, d: usize) -> &LevelTable {
        self.levels[d].get_or_init(|| {
            let lifts = self.x_grid_lifts();
            let (left, right): (Vec<_>, Vec<_>) = lifts
                .par_iter()
                .map(|z| {
                    let (b1, b2) = self.pair_bases(d, *z);
                    (self.frame_values(&b1), self.weighted_frame_values(&b2))
                })
                .unzip();
            LevelTable { lifts, left, right }
        })
    }

    pub(crate) fn weighted_frame_values(&self, basis: &SectionBasis) -> CMatrix {
        let mut f = self.frame_values(basis);
        for (k, w) in self.frame.weights.iter().enumerate() {
            f.column_mut(k).scale_mut(*w);
        }
        f
    }

    /// Normalized embedding on the x-grid, for curve-distance seeding.
    pub(crate) fn curve_grid(&self) -> &[(C64, CVector)] {
        self.curve_grid.get_or_init(|| {
            self.x_grid_lifts()
                .into_par_iter()
                .map(|z| (z, normalized(&self.embed_raw(z))))
                .collect()
        })
    }

    /// The two bases of a divisor pair with lifts summing exactly to the
    /// lift of `σ(H)`: degree `d` at `lift`, degree `n - d` at `l_lift - lift`.
    pub fn pair_bases(&self, d: usize, lift: C64) -> (SectionBasis, SectionBasis) {
        (
            SectionBasis::from_lift(d, lift, &self.spec),
            SectionBasis::from_lift(self.n() - d, self.l_lift() - lift, &self.spec),
        )
    }

    pub fn random_projective_point<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        normalized(&gaussian_vector(self.n(), rng))
    }
}

/// Vector with i.i.d. standard complex Gaussian entries.
pub fn gaussian_vector<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_iterator(
        len,
        (0..len).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    )
}
