//! Symplectic leaves of the elliptic Poisson structure on `P^{n-1}`.
//!
//! The curve is `E = C/(Z + τZ)` embedded by a degree-`n` line bundle `L`.
//! Points of `P^{n-1}` are length-`n` complex vectors in the coordinates of a
//! fixed theta basis of `H⁰(E, L)`; see [`THETA_CONVENTION`].

pub mod bundles;
pub mod classify;
pub mod curve;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod linear_systems;
pub mod poisson;
pub mod poly;
pub mod scalar;
pub mod secant;
pub mod verify;

pub use bundles::{enumerate_leaf_families, BundleDescriptor, LeafFamily, LeafLabel};
pub use classify::{AmbiguousClassification, Classification, ConsistencyRecord};
pub use curve::{gaussian_vector, Curve};
pub use elliptic::{CurveSpec, Lattice, ToleranceConfig, THETA_CONVENTION};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Subspace, C64};
pub use linear_systems::{LinearForm, RoomMatrix, SectionBasis};
pub use poisson::{PoissonCache, PoissonMatrix, PoissonStructure};
pub use poly::Polynomial;
pub use secant::{SecantCount, SecantLevel};
pub use verify::{CheckRecord, CheckStatus, Level, VerificationReport};

/// A homogeneous polynomial in the coordinates of `P^{n-1}`.
pub type PolynomialForm = Polynomial<f64>;

/// A point of the curve, stored as its canonical representative.
pub type EPoint = elliptic::TorusPoint<f64>;
/// An effective divisor on the curve.
pub type Divisor = elliptic::Divisor<f64>;
