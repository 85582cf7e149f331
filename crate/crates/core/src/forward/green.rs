//! Incident plane wave and the 2D outgoing Green's function
//! `Phi(x, y) = (i/4) H0^(1)(k |x - y|)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun;

const I_OVER_4: Complex64 = Complex64::new(0.0, 0.25);

/// `exp(i k (x1 cos theta + x2 sin theta))` at each point.
pub fn incident_plane_wave(k: f64, theta: f64, points: &[[f64; 2]]) -> Vec<Complex64> {
    let (s, c) = theta.sin_cos();
    points
        .iter()
        .map(|p| Complex64::from_polar(1.0, k * (p[0] * c + p[1] * s)))
        .collect()
}

pub fn green2d(k: f64, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
    if r == 0.0 {
        return Err(Error::Singular("green2d"));
    }
    Ok(green_at_distance(k, r))
}

/// `grad_x Phi(x, y) . nu = -(i k / 4) H1^(1)(k r) (x - y) . nu / r`.
pub fn green2d_normal_derivative(
    k: f64,
    x: [f64; 2],
    y: [f64; 2],
    nu: [f64; 2],
) -> Result<Complex64> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        return Err(Error::Singular("green2d_normal_derivative"));
    }
    Ok(green_radial_derivative(k, r) * ((d[0] * nu[0] + d[1] * nu[1]) / r))
}

#[inline]
pub(crate) fn green_at_distance(k: f64, r: f64) -> Complex64 {
    I_OVER_4 * specfun::h0(k * r)
}

/// `d Phi / d r = -(i k / 4) H1^(1)(k r)`.
#[inline]
pub(crate) fn green_radial_derivative(k: f64, r: f64) -> Complex64 {
    -I_OVER_4 * k * specfun::h1(k * r)
}
