//! Theta series with characteristics.
//!
//! Convention: `θ[a,b](z, τ) = Σ_k exp(πi (k+a)² τ + 2πi (k+a)(z+b))`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{e2pii, i_times, Real};

pub const THETA_CONVENTION: &str = "theta[a,b](z,tau)=sum_k exp(pi i (k+a)^2 tau + 2 pi i (k+a)(z+b)); \
level-d basis e_j(z)=sum_{m=j mod d} exp(pi i m^2 tau/d + 2 pi i m (z-t)), t=(x-d(1+tau)/2)/d";

/// Natural log of the modulus of a single series term, relative scale only.
fn log_modulus<T: Real>(k: T, tau: Complex<T>, z_im: T) -> T {
    let pi = T::PI();
    -pi * k * k * tau.im - (pi + pi) * k * z_im
}

/// Truncated theta series with characteristic `[a, b]`, summing `2·terms + 1`
/// terms centred on the dominant index.
pub fn theta_char<T: Real>(a: T, b: T, z: Complex<T>, tau: Complex<T>, terms: usize) -> Result<Complex<T>> {
    if !(tau.im > T::zero()) {
        return Err(Error::InvalidCurve("Im(tau) must be positive".into()));
    }
    // Sum at a representative with Re z in [0, 1) so the unit-shift relation
    // is exact up to rounding of the multiplier.
    let shift = z.re.floor();
    let z = Complex::new(z.re - shift, z.im);
    let centre = (-(z.im / tau.im) - a).round();
    let lo = centre - T::of(terms as f64);
    let hi = centre + T::of(terms as f64);

    let pi = T::PI();
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut peak = T::neg_infinity();
    let mut k = lo;
    while k <= hi {
        let ka = k + a;
        let expo = i_times(tau * (pi * ka * ka) + (z + b) * (T::of(2.0) * pi * ka));
        sum = sum + expo.exp();
        peak = peak.max(expo.re);
        k = k + T::one();
    }
    let edge = log_modulus(lo + a, tau, z.im).max(log_modulus(hi + a, tau, z.im));
    let tail = (edge - peak).exp();
    if tail > T::epsilon() {
        return Err(Error::ThetaTruncation { terms, tail: tail.as_f64() });
    }
    if shift == T::zero() {
        return Ok(sum);
    }
    let turns = (a * shift) - (a * shift).floor();
    Ok(sum * e2pii(Complex::new(turns, T::zero())))
}

/// Level-`d` theta basis and its derivatives at `w`:
/// `out[k][j] = (d/dw)^k Σ_{m ≡ j mod d} exp(πi m² τ/d + 2πi m w)`.
///
/// Terms below `e^-40` of the dominant one are skipped; `terms` bounds the
/// window per residue class.
pub fn level_thetas<T: Real>(
    d: usize,
    tau: Complex<T>,
    w: Complex<T>,
    max_order: usize,
    terms: usize,
) -> Result<Vec<Vec<Complex<T>>>> {
    assert!(d >= 1);
    let df = T::of(d as f64);
    let pi = T::PI();
    let two_pi_i = Complex::new(T::zero(), pi + pi);
    let tau_d = tau / df;
    let centre = (-(df * w.im / tau.im)).round().to_i64().unwrap_or(0);
    let half = (d * terms) as i64;
    let log_mod = |m: i64| {
        let mf = T::of(m as f64);
        -pi * mf * mf * tau_d.im - (pi + pi) * mf * w.im
    };
    let peak = log_mod(centre);
    let cutoff = peak - T::of(40.0);
    if log_mod(centre - half).max(log_mod(centre + half)) > peak + T::epsilon().ln() {
        return Err(Error::ThetaTruncation { terms, tail: (log_mod(centre - half).max(log_mod(centre + half)) - peak).exp().as_f64() });
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![vec![zero; d]; max_order + 1];
    let mut accumulate = |m: i64| {
        let mf = T::of(m as f64);
        let term = i_times(tau_d * (pi * mf * mf) + w * (T::of(2.0) * pi * mf)).exp();
        let j = m.rem_euclid(d as i64) as usize;
        let factor = two_pi_i * mf;
        let mut t = term;
        for row in out.iter_mut() {
            row[j] = row[j] + t;
            t = t * factor;
        }
    };
    accumulate(centre);
    for step in 1..=half {
        let (up, down) = (centre + step, centre - step);
        let live_up = log_mod(up) > cutoff;
        let live_down = log_mod(down) > cutoff;
        if live_up {
            accumulate(up);
        }
        if live_down {
            accumulate(down);
        }
        if !live_up && !live_down {
            break;
        }
    }
    Ok(out)
}

/// `θ[1/2,1/2](z, τ)` and its derivative, used for deflating known zeros.
pub fn odd_theta_with_derivative<T: Real>(z: Complex<T>, tau: Complex<T>, terms: usize) -> (Complex<T>, Complex<T>) {
    let h = T::of(0.5);
    let centre = (-(z.im / tau.im) - h).round();
    let pi = T::PI();
    let mut val = Complex::new(T::zero(), T::zero());
    let mut der = val;
    let mut k = centre - T::of(terms as f64);
    let hi = centre + T::of(terms as f64);
    while k <= hi {
        let ka = k + h;
        let term = i_times(tau * (pi * ka * ka) + (z + h) * (T::of(2.0) * pi * ka)).exp();
        val = val + term;
        der = der + term * Complex::new(T::zero(), T::of(2.0) * pi * ka);
        k = k + T::one();
    }
    (val, der)
}

/// Quasi-periodicity multiplier of `θ[a,b]` under `z ↦ z + 1`.
pub fn unit_shift_multiplier<T: Real>(a: T) -> Complex<T> {
    e2pii(Complex::new(a, T::zero()))
}
