//! The quadratic Poisson bracket on `C^n` determined by the secant equations.

mod build;
mod cache;
mod flow;
mod matrix;

pub use build::{
    quadric_matrix, singular_quadrics, syzygy_poisson_matrix, Diagnostics, NullSpectrum, PoissonStructure,
    SecantForms, SingularMember, DEFAULT_OVERSAMPLING, NULL_GAP,
};
pub use cache::{PoissonCache, Probe, PROBE_COUNT, PROBE_TOL};
pub use flow::leaf_flow;
pub use matrix::PoissonMatrix;
