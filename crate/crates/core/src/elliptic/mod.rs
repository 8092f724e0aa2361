//! Complex-torus arithmetic, divisors and theta series.

mod divisor;
mod lattice;
mod spec;
pub mod theta;

pub use divisor::{lin_equiv, random_divisor_with_sum, random_point, Divisor};
pub use lattice::{Lattice, TorusPoint};
pub use spec::{CurveSpec, ToleranceConfig};
pub use theta::{theta_char, THETA_CONVENTION};
