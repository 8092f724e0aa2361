//! Rank-two bundles of degree `n` with determinant `L` whose leaves are
//! nonempty, and the integer invariants attached to them.

use serde::{Deserialize, Serialize};

use crate::elliptic::CurveSpec;
use crate::secant::SecantCount;
use crate::{Divisor, EPoint};

/// Middle term of an extension `0 → O → ℰ → L → 0`.
///
/// `DecomposableSum { d, x }` is `O(D) ⊕ L(-D)` for `D ∈ E^[d]_x`. At
/// `d = n/2` with `x ∈ Ω` it is `L_ω ⊕ L_ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum BundleDescriptor {
    DecomposableSum { d: usize, x: EPoint },
    IndecomposableOdd,
    IndecomposableOmega { omega: EPoint },
}

/// The leaf a point belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafLabel {
    pub bundle: BundleDescriptor,
    pub witness: Option<Divisor>,
    pub secant_count: Option<SecantCount>,
}

fn in_omega(spec: &CurveSpec, x: &EPoint) -> bool {
    let lat = spec.lattice();
    lat.eq(&lat.add(x, x), &spec.l_sum, spec.tolerances.lattice_tol)
}

/// `h⁰(N(-D))` for a line bundle `N` of degree `deg` and sum `sum`, with
/// `D` of degree `k` and sum `s`.
fn h0_line_twist(spec: &CurveSpec, deg: i64, sum: &EPoint, k: i64, s: &EPoint) -> usize {
    let lat = spec.lattice();
    match deg - k {
        e if e > 0 => e as usize,
        0 => usize::from(lat.eq(sum, s, spec.tolerances.lattice_tol)),
        _ => 0,
    }
}

impl BundleDescriptor {
    pub fn is_split_omega(&self, spec: &CurveSpec) -> bool {
        matches!(self, Self::DecomposableSum { d, x } if 2 * d == spec.n && in_omega(spec, x))
    }

    pub fn validate(&self, spec: &CurveSpec) -> bool {
        match self {
            Self::DecomposableSum { d, .. } => *d >= 1 && 2 * d <= spec.n,
            Self::IndecomposableOdd => !spec.is_even(),
            Self::IndecomposableOmega { omega } => spec.is_even() && in_omega(spec, omega),
        }
    }

    /// `dim End(ℰ)`.
    pub fn end_dim(&self, spec: &CurveSpec) -> usize {
        match self {
            _ if self.is_split_omega(spec) => 4,
            Self::DecomposableSum { d, .. } => 2 + (spec.n - 2 * d),
            Self::IndecomposableOdd => 1,
            Self::IndecomposableOmega { .. } => 2,
        }
    }

    /// `dim Aut(ℰ)`, from the degrees of the summands.
    pub fn aut_dim(&self, spec: &CurveSpec) -> usize {
        match self {
            Self::DecomposableSum { d, .. } => {
                if self.is_split_omega(spec) {
                    4
                } else {
                    2 + (spec.n as i64 - 2 * *d as i64).unsigned_abs() as usize
                }
            }
            Self::IndecomposableOdd => 1,
            Self::IndecomposableOmega { .. } => 2,
        }
    }

    pub fn leaf_dim(&self, spec: &CurveSpec) -> usize {
        spec.n - self.aut_dim(spec)
    }

    /// Degree of the hypersurface `P Z_ℰ`.
    pub fn pz_degree(&self, spec: &CurveSpec) -> usize {
        match self {
            Self::DecomposableSum { d: 1, .. } => 2,
            _ if spec.n == 4 && self.is_split_omega(spec) => 2,
            _ => spec.n,
        }
    }

    /// Summands `(degree, sum)` of a split bundle.
    fn summands(&self, spec: &CurveSpec) -> Option<[(i64, EPoint); 2]> {
        let Self::DecomposableSum { d, x } = self else { return None };
        let lat = spec.lattice();
        Some([(*d as i64, *x), ((spec.n - d) as i64, lat.sub(&spec.l_sum, x))])
    }

    /// `h⁰(ℰ(-x))`.
    pub fn h0_e_minus_x(&self, spec: &CurveSpec, x: &EPoint) -> usize {
        match self.summands(spec) {
            Some(parts) => parts.iter().map(|(k, s)| h0_line_twist(spec, *k, s, 1, x)).sum(),
            None => spec.n - 2,
        }
    }

    /// `h⁰(ℰ(-x-y))`.
    pub fn h0_e_minus_xy(&self, spec: &CurveSpec, x: &EPoint, y: &EPoint) -> usize {
        let lat = spec.lattice();
        let xy = lat.add(x, y);
        match (self, self.summands(spec)) {
            (_, Some(parts)) => parts.iter().map(|(k, s)| h0_line_twist(spec, *k, s, 2, &xy)).sum(),
            // ℰ_ω(-x-y) is indecomposable of degree n - 4; at n = 4 it is
            // F_2 twisted by L_ω(-x-y).
            (Self::IndecomposableOmega { omega }, None) if spec.n == 4 => {
                usize::from(lat.eq(omega, &xy, spec.tolerances.lattice_tol))
            }
            _ => spec.n.saturating_sub(4),
        }
    }

    pub fn leaf_nonempty(&self, spec: &CurveSpec) -> bool {
        self.validate(spec)
    }

    /// Whether the two descriptors name the same leaf. At `d = n/2` the sums
    /// `x` and `σ(H) - x` give isomorphic bundles.
    pub fn same_leaf(&self, other: &Self, spec: &CurveSpec, tol: f64) -> bool {
        let lat = spec.lattice();
        match (self, other) {
            (Self::DecomposableSum { d, x }, Self::DecomposableSum { d: e, x: y }) => {
                d == e
                    && (lat.distance(x, y) < tol
                        || (2 * d == spec.n && lat.distance(&lat.sub(&spec.l_sum, x), y) < tol))
            }
            (Self::IndecomposableOdd, Self::IndecomposableOdd) => true,
            (Self::IndecomposableOmega { omega: a }, Self::IndecomposableOmega { omega: b }) => {
                lat.distance(a, b) < tol
            }
            _ => false,
        }
    }

    /// Secant level of the stratum: `d` for split bundles, `r = ⌊n/2⌋` for
    /// `ℰ_ω`, `r + 1` for `ℰ_o`.
    fn level(&self, spec: &CurveSpec) -> usize {
        match self {
            Self::DecomposableSum { d, .. } => *d,
            Self::IndecomposableOmega { .. } => spec.n / 2,
            Self::IndecomposableOdd => spec.n / 2 + 1,
        }
    }

    /// Whether the closure of the leaf of `self` contains the leaf of `inner`.
    pub fn closure_contains(&self, inner: &Self, spec: &CurveSpec) -> bool {
        let tol = spec.tolerances.lattice_tol;
        if self.same_leaf(inner, spec, tol) {
            return true;
        }
        if self.is_split_omega(spec) {
            // A leaf of dimension n - 4 cannot contain a leaf of the same
            // dimension in its boundary.
            return inner.level(spec) < self.level(spec) && inner.leaf_dim(spec) < self.leaf_dim(spec);
        }
        match (self, inner) {
            (Self::IndecomposableOdd, _) => true,
            (Self::IndecomposableOmega { omega }, Self::DecomposableSum { .. }) if inner.is_split_omega(spec) => {
                let Self::DecomposableSum { x, .. } = inner else { unreachable!() };
                spec.lattice().eq(omega, x, tol)
            }
            _ => inner.level(spec) < self.level(spec),
        }
    }

    pub fn short_name(&self, spec: &CurveSpec) -> String {
        match self {
            _ if self.is_split_omega(spec) => {
                let Self::DecomposableSum { x, .. } = self else { unreachable!() };
                format!("L_w+L_w (w = {})", fmt_point(x))
            }
            Self::DecomposableSum { d, x } => format!("E_{{{d},x}} (x = {})", fmt_point(x)),
            Self::IndecomposableOdd => "E_o".into(),
            Self::IndecomposableOmega { omega } => format!("E_w (w = {})", fmt_point(omega)),
        }
    }
}

fn fmt_point(p: &EPoint) -> String {
    format!("{:.6}{:+.6}i", p.z().re, p.z().im)
}

/// One family of leaves, parametrized by `x ∈ E` or fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum LeafFamily {
    /// `ℰ_{d,x}` for `x ∈ E`; at `d = n/2` with `x ∉ Ω`.
    Split { d: usize },
    /// `L_ω ⊕ L_ω`.
    SplitOmega { omega: EPoint },
    Odd,
    Omega { omega: EPoint },
}

impl LeafFamily {
    /// The descriptor of the member with parameter `x`; fixed families ignore `x`.
    pub fn descriptor(&self, spec: &CurveSpec, x: &EPoint) -> BundleDescriptor {
        match self {
            Self::Split { d } => BundleDescriptor::DecomposableSum { d: *d, x: *x },
            Self::SplitOmega { omega } => BundleDescriptor::DecomposableSum { d: spec.n / 2, x: *omega },
            Self::Odd => BundleDescriptor::IndecomposableOdd,
            Self::Omega { omega } => BundleDescriptor::IndecomposableOmega { omega: *omega },
        }
    }

    /// Whether `x` is an admissible parameter (`x ∉ Ω` at the middle level).
    pub fn admits(&self, spec: &CurveSpec, x: &EPoint) -> bool {
        match self {
            Self::Split { d } if 2 * d == spec.n => !in_omega(spec, x),
            _ => true,
        }
    }

    pub fn leaf_dim(&self, spec: &CurveSpec) -> usize {
        // ω + 1/4 is never in Ω.
        let x = spec.lattice().reduce(spec.omega_coset()[0].z() + num_complex::Complex::new(0.25, 0.0));
        self.descriptor(spec, &x).leaf_dim(spec)
    }

    /// Complex dimension of the parameter space of the family.
    pub fn parameter_dim(&self) -> usize {
        usize::from(matches!(self, Self::Split { .. }))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Split { d } => format!("E_{{{d},x}}"),
            Self::SplitOmega { omega } => format!("L_w+L_w (w = {})", fmt_point(omega)),
            Self::Odd => "E_o".into(),
            Self::Omega { omega } => format!("E_w (w = {})", fmt_point(omega)),
        }
    }
}

/// All families with nonempty leaves.
pub fn enumerate_leaf_families(spec: &CurveSpec) -> Vec<LeafFamily> {
    let mut out: Vec<LeafFamily> = (1..=spec.n / 2).map(|d| LeafFamily::Split { d }).collect();
    if spec.is_even() {
        for omega in spec.omega_coset() {
            out.push(LeafFamily::SplitOmega { omega });
        }
        for omega in spec.omega_coset() {
            out.push(LeafFamily::Omega { omega });
        }
    } else {
        out.push(LeafFamily::Odd);
    }
    out
}
