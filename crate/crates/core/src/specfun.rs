//! Cylinder and spherical Bessel functions of low order.
//!
//! For `x <= ASYMPTOTIC_FROM` the functions come from Miller's backward
//! recurrence for `J_n(x)`, normalized with `J_0 + 2 sum J_2k = 1`. The same
//! recurrence feeds the Neumann series for `Y_0` and `Y_1`:
//!
//! ```text
//! Y0(x) = 2/pi (ln(x/2) + gamma) J0(x) - 4/pi sum_k (-1)^k J_2k(x) / k
//! Y1(x) = -Y0'(x)
//! ```
//!
//! Above the crossover the Hankel asymptotic expansion is summed until its
//! terms stop shrinking. The crossover sits at 20 so that the smallest
//! asymptotic term stays below 1e-16.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ASYMPTOTIC_FROM: f64 = 20.0;
const RESCALE_ABOVE: f64 = 1e250;

/// `J_0(x)` for `x >= 0`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check_nonnegative("bessel_j0", x)?;
    Ok(j0(x))
}

/// `J_1(x)` for `x >= 0`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check_nonnegative("bessel_j1", x)?;
    Ok(j1(x))
}

/// `Y_0(x)` for `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    check_positive("bessel_y0", x)?;
    Ok(y0(x))
}

/// `Y_1(x)` for `x > 0`.
pub fn bessel_y1(x: f64) -> Result<f64> {
    check_positive("bessel_y1", x)?;
    Ok(y1(x))
}

/// Hankel function of the first kind `H_order^(1)(x) = J_order(x) + i Y_order(x)`
/// for `order` in {0, 1}.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    check_positive("hankel1", x)?;
    match order {
        0 => Ok(h0(x)),
        1 => Ok(h1(x)),
        _ => Err(Error::domain(
            "hankel1",
            format!("order {order} not supported (0 or 1)"),
        )),
    }
}

/// Spherical Bessel function `j_0(x) = sin(x) / x`, with `j_0(0) = 1`.
pub fn spherical_j0(x: f64) -> Result<f64> {
    check_nonnegative("spherical_j0", x)?;
    Ok(sph_j0(x))
}

fn check_nonnegative(routine: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(
            routine,
            format!("argument {x} must be finite and >= 0"),
        ));
    }
    Ok(())
}

fn check_positive(routine: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(
            routine,
            format!("argument {x} must be finite and > 0"),
        ));
    }
    Ok(())
}

// Unchecked kernels used on hot paths where the argument is known valid.

#[inline]
pub(crate) fn j0(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x <= ASYMPTOTIC_FROM {
        miller(x).j0
    } else {
        asymptotic(0, x).0
    }
}

#[inline]
pub(crate) fn j1(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x <= ASYMPTOTIC_FROM {
        miller(x).j1
    } else {
        asymptotic(1, x).0
    }
}

#[inline]
pub(crate) fn y0(x: f64) -> f64 {
    if x <= ASYMPTOTIC_FROM {
        miller(x).y0(x)
    } else {
        asymptotic(0, x).1
    }
}

#[inline]
pub(crate) fn y1(x: f64) -> f64 {
    if x <= ASYMPTOTIC_FROM {
        miller(x).y1(x)
    } else {
        asymptotic(1, x).1
    }
}

#[inline]
pub(crate) fn h0(x: f64) -> Complex64 {
    if x <= ASYMPTOTIC_FROM {
        let m = miller(x);
        Complex64::new(m.j0, m.y0(x))
    } else {
        let (j, y) = asymptotic(0, x);
        Complex64::new(j, y)
    }
}

#[inline]
pub(crate) fn h1(x: f64) -> Complex64 {
    if x <= ASYMPTOTIC_FROM {
        let m = miller(x);
        Complex64::new(m.j1, m.y1(x))
    } else {
        let (j, y) = asymptotic(1, x);
        Complex64::new(j, y)
    }
}

#[inline]
pub(crate) fn sph_j0(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // 1 - x^2/6 + x^4/120 is exact to rounding here.
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Derivative of `j_0`: `(x cos x - sin x) / x^2`.
#[inline]
pub(crate) fn sph_j0_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        -x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0))
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

struct MillerSums {
    j0: f64,
    j1: f64,
    /// `sum_k (-1)^k J_2k / k`
    even: f64,
    /// `sum_k (-1)^k (J_2k-1 - J_2k+1) / k`
    odd: f64,
}

impl MillerSums {
    fn log_term(x: f64) -> f64 {
        (0.5 * x).ln() + EULER_GAMMA
    }

    fn y0(&self, x: f64) -> f64 {
        FRAC_2_PI * (Self::log_term(x) * self.j0 - 2.0 * self.even)
    }

    fn y1(&self, x: f64) -> f64 {
        FRAC_2_PI * (Self::log_term(x) * self.j1 - self.j0 / x + self.odd)
    }
}

fn miller_start(x: f64) -> usize {
    let m = (1.3 * x) as usize + 40;
    m + (m & 1)
}

/// Backward recurrence from an even starting order.
fn miller(x: f64) -> MillerSums {
    let start = miller_start(x);
    let two_over_x = 2.0 / x;

    let mut above = 0.0_f64; // J_{n+1}
    let mut cur = 1e-30_f64; // J_n
    let mut norm = 0.0;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut j1 = 0.0;

    let mut n = start;
    loop {
        // Accumulate the contribution of J_n.
        if n.is_multiple_of(2) {
            if n > 0 {
                let k = (n / 2) as f64;
                norm += 2.0 * cur;
                let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
                even += sign * cur / k;
            }
        } else if n == 1 {
            j1 = cur;
            odd -= cur;
        } else {
            let j = ((n - 1) / 2) as f64;
            let sign = if ((n - 1) / 2).is_multiple_of(2) { -1.0 } else { 1.0 };
            odd += sign * (1.0 / j + 1.0 / (j + 1.0)) * cur;
        }
        if n == 0 {
            norm += cur;
            break;
        }
        let below = (n as f64) * two_over_x * cur - above;
        above = cur;
        cur = below;
        n -= 1;
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            above *= s;
            norm *= s;
            even *= s;
            odd *= s;
            j1 *= s;
        }
    }
    let inv = 1.0 / norm;
    MillerSums {
        j0: cur * inv,
        j1: j1 * inv,
        even: even * inv,
        odd: odd * inv,
    }
}

/// Hankel asymptotic expansion, returning `(J_nu(x), Y_nu(x))` for `nu` in {0, 1}.
fn asymptotic(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k(nu) / x^k
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * k as f64 * x);
        let mag = a.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // chi = x - (nu/2 + 1/4) pi, expanded to avoid cancellation in the phase.
    let (cos_chi, sin_chi) = if nu == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// `J_0 .. J_nmax` at `x >= 0`.
pub(crate) fn bessel_jn_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if (nmax as f64) < x {
        // Upward recurrence is stable while n < x.
        out[0] = j0(x);
        if nmax >= 1 {
            out[1] = j1(x);
        }
        for n in 1..nmax {
            out[n + 1] = 2.0 * n as f64 / x * out[n] - out[n - 1];
        }
        return out;
    }
    let start = {
        let m = miller_start(x).max(nmax + 30);
        m + (m & 1)
    };
    let two_over_x = 2.0 / x;
    let mut above = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut norm = 0.0;
    let mut n = start;
    loop {
        if n <= nmax {
            out[n] = cur;
        }
        if n == 0 {
            norm += cur;
            break;
        }
        if n % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = (n as f64) * two_over_x * cur - above;
        above = cur;
        cur = below;
        n -= 1;
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let inv = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= inv;
    }
    out
}

/// `Y_0 .. Y_nmax` at `x > 0` by upward recurrence.
pub(crate) fn bessel_yn_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    out[0] = y0(x);
    if nmax >= 1 {
        out[1] = y1(x);
    }
    for n in 1..nmax {
        out[n + 1] = 2.0 * n as f64 / x * out[n] - out[n - 1];
    }
    out
}
