use rand::Rng;

use super::matrix::PoissonMatrix;
use crate::curve::gaussian_vector;
use crate::error::{Error, Result};
use crate::linalg::CVector;

/// Speeds above this stop the integration.
const MAX_SPEED: f64 = 1e6;

/// `M(p) α_p` with `α_p` the Hermitian projection of `α` onto `Ann(p)`.
fn field(omega: &PoissonMatrix, alpha: &CVector, p: &CVector) -> CVector {
    let pair = alpha.iter().zip(p.iter()).map(|(a, b)| a * b).sum::<crate::C64>();
    let alpha_p = alpha - p.map(|z| z.conj()) * (pair / p.norm_squared());
    omega.bracket_eval(p) * alpha_p
}

/// RK4 trajectory of the leaf-tangent field for a random covector, with the
/// point renormalized after every step. Returns `steps + 1` points.
pub fn leaf_flow<R: Rng + ?Sized>(
    omega: &PoissonMatrix,
    p0: &CVector,
    steps: usize,
    dt: f64,
    rng: &mut R,
) -> Result<Vec<CVector>> {
    let alpha = gaussian_vector(omega.n(), rng).normalize();
    let mut p = p0.normalize();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p.clone());
    let h = crate::C64::new(dt, 0.0);
    for step in 0..steps {
        let k1 = field(omega, &alpha, &p);
        let k2 = field(omega, &alpha, &(&p + &k1 * (h * 0.5)));
        let k3 = field(omega, &alpha, &(&p + &k2 * (h * 0.5)));
        let k4 = field(omega, &alpha, &(&p + &k3 * h));
        let speed = [&k1, &k2, &k3, &k4].iter().map(|k| k.norm()).fold(0.0, f64::max);
        if !speed.is_finite() || speed > MAX_SPEED {
            return Err(Error::Numeric(format!("flow speed {speed:.3e} at step {step}")));
        }
        let two = crate::C64::new(2.0, 0.0);
        p = (&p + (k1 + k2 * two + k3 * two + k4) * (h / 6.0)).normalize();
        out.push(p.clone());
    }
    Ok(out)
}
