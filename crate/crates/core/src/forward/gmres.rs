//! Restarted GMRES for complex, matrix-free linear operators.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Target for `||b - A x|| / ||b||`.
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            restart: 50,
            max_iterations: 1000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual estimate after every inner iteration.
    pub residual_history: Vec<f64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Givens rotation zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    if b.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = an.hypot(b.norm());
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Solves `A x = b` starting from `x = 0`, where `apply(v, out)` writes `A v`.
pub fn gmres<F>(mut apply: F, b: &[Complex64], opts: &GmresOptions) -> Result<GmresOutcome>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let b_norm = norm(b);
    let mut history = Vec::new();
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            solution: x,
            iterations: 0,
            residual_history: history,
        });
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut ax = vec![zero; n];
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut hess = vec![vec![zero; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![zero; m];
    let mut g = vec![zero; m + 1];

    loop {
        apply(&x, &mut ax);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / b_norm;
        if rel <= opts.tolerance {
            history.push(rel);
            return Ok(GmresOutcome {
                solution: x,
                iterations,
                residual_history: history,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: rel,
                history,
            });
        }

        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = zero);
        g[0] = Complex64::new(beta, 0.0);

        let mut inner = 0;
        while inner < m && iterations < opts.max_iterations {
            let mut w = vec![zero; n];
            apply(&basis[inner], &mut w);
            // Modified Gram-Schmidt.
            for (j, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                hess[j][inner] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * vi;
                }
            }
            let wn = norm(&w);
            hess[inner + 1][inner] = Complex64::new(wn, 0.0);

            for j in 0..inner {
                let (c, s) = (cs[j], sn[j]);
                let t = c * hess[j][inner] + s * hess[j + 1][inner];
                hess[j + 1][inner] = -s.conj() * hess[j][inner] + c * hess[j + 1][inner];
                hess[j][inner] = t;
            }
            let (c, s) = givens(hess[inner][inner], hess[inner + 1][inner]);
            cs[inner] = c;
            sn[inner] = s;
            hess[inner][inner] = c * hess[inner][inner] + s * hess[inner + 1][inner];
            hess[inner + 1][inner] = zero;
            g[inner + 1] = -s.conj() * g[inner];
            g[inner] *= c;

            iterations += 1;
            inner += 1;
            let rel = g[inner].norm() / b_norm;
            history.push(rel);
            if rel <= opts.tolerance || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // Back substitution on the triangular system.
        let mut y = vec![zero; inner];
        for i in (0..inner).rev() {
            let mut acc = g[i];
            for j in i + 1..inner {
                acc -= hess[i][j] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
    }
}
