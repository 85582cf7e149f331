//! Lippmann-Schwinger solver `u - k^2 K (eta u) = u_in` on a periodized grid.
//!
//! `K` is the rectangle-rule volume potential with the Green's function sampled
//! at every lattice offset of the cell, applied as a circular convolution. The
//! wrap-around guard on `ContrastGrid` keeps every offset needed between two
//! support nodes inside the principal range, so the circular product equals
//! the free-space one there. The diagonal entry replaces the singular sample
//! with a weight fitted so the lattice sum reproduces `int Phi g` exactly for a
//! narrow Gaussian `g`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::gmres::{gmres, GmresOptions};
use super::green::{green_at_distance, incident_plane_wave};
use super::grid::{ContrastGrid, GridGeometry};
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let g = GmresOptions::default();
        SolverOptions {
            tolerance: g.tolerance,
            restart: g.restart,
            max_iterations: g.max_iterations,
        }
    }
}

impl SolverOptions {
    fn gmres(&self) -> GmresOptions {
        GmresOptions {
            restart: self.restart,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
        }
    }
}

/// Total field on the solver grid for one incident plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalField {
    pub u: Vec<Complex64>,
    pub k: f64,
    /// Incident direction in radians.
    pub theta: f64,
    pub geometry: GridGeometry,
    pub iterations: usize,
    pub residual: f64,
}

impl TotalField {
    pub fn value_at(&self, ix: usize, iy: usize) -> Complex64 {
        self.u[iy * self.geometry.n + ix]
    }
}

pub fn ls_solve(grid: &ContrastGrid, k: f64, theta: f64) -> Result<TotalField> {
    ls_solve_with(grid, k, theta, &SolverOptions::default())
}

pub fn ls_solve_with(
    grid: &ContrastGrid,
    k: f64,
    theta: f64,
    opts: &SolverOptions,
) -> Result<TotalField> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Config(format!("wave number {k} must be positive")));
    }
    if !theta.is_finite() {
        return Err(Error::Config("incident angle must be finite".into()));
    }
    let geometry = grid.geometry();
    let nodes: Vec<[f64; 2]> = (0..geometry.len()).map(|i| geometry.node_at(i)).collect();
    let u_in = incident_plane_wave(k, theta, &nodes);
    if grid.is_zero() {
        return Ok(TotalField {
            u: u_in,
            k,
            theta,
            geometry,
            iterations: 0,
            residual: 0.0,
        });
    }

    let op = VolumePotential::new(geometry, k);
    let support = grid.support();
    let eta = grid.eta();
    let k2 = k * k;
    let rhs: Vec<Complex64> = support.iter().map(|&i| u_in[i]).collect();
    let mut work = vec![Complex64::new(0.0, 0.0); geometry.len()];

    // Unknowns are u on the support; off-support values follow from the
    // representation formula afterwards.
    let mut apply = |v: &[Complex64], out: &mut [Complex64]| {
        work.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
        for (&i, vi) in support.iter().zip(v) {
            work[i] = eta[i] * vi;
        }
        op.convolve(&mut work);
        for ((o, &i), vi) in out.iter_mut().zip(support).zip(v) {
            *o = vi - k2 * work[i];
        }
    };
    let outcome = gmres(&mut apply, &rhs, &opts.gmres())?;

    let mut work = vec![Complex64::new(0.0, 0.0); geometry.len()];
    for (&i, vi) in support.iter().zip(&outcome.solution) {
        work[i] = eta[i] * vi;
    }
    op.convolve(&mut work);
    let mut u: Vec<Complex64> = u_in.iter().zip(&work).map(|(a, b)| a + k2 * b).collect();
    for (&i, vi) in support.iter().zip(&outcome.solution) {
        u[i] = *vi;
    }
    Ok(TotalField {
        u,
        k,
        theta,
        geometry,
        iterations: outcome.iterations,
        residual: outcome.residual_history.last().copied().unwrap_or(0.0),
    })
}

/// Circular convolution with the sampled volume-potential kernel.
struct VolumePotential {
    n: usize,
    /// Kernel spectrum in the transposed layout produced by `forward`,
    /// pre-divided by `n^2`.
    spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl VolumePotential {
    fn new(geometry: GridGeometry, k: f64) -> Self {
        let n = geometry.n;
        let h = geometry.h;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let offset = |i: usize| {
            if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            }
        };
        let w = h * h;
        let mut kernel: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let r = h * offset(idx % n).hypot(offset(idx / n));
                if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    w * green_at_distance(k, r)
                }
            })
            .collect();
        kernel[0] = self_weight(k, h);
        let mut op = VolumePotential {
            n,
            spectrum: Vec::new(),
            fwd,
            inv,
        };
        op.forward(&mut kernel);
        let scale = 1.0 / (n * n) as f64;
        kernel.iter_mut().for_each(|v| *v *= scale);
        op.spectrum = kernel;
        op
    }

    fn rows(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let scratch_len = plan.get_inplace_scratch_len();
        data.par_chunks_mut(self.n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| plan.process_with_scratch(row, scratch),
        );
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.rows(data, &self.fwd);
        self.transpose(data);
        self.rows(data, &self.fwd);
    }

    fn convolve(&self, data: &mut [Complex64]) {
        self.forward(data);
        data.par_iter_mut()
            .zip(self.spectrum.par_iter())
            .for_each(|(d, s)| *d *= s);
        self.rows(data, &self.inv);
        self.transpose(data);
        self.rows(data, &self.inv);
    }
}

/// Exponential integral `Ei(x)` for `x > 0` by its power series.
fn exp_integral_ei(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..500 {
        term *= x / n as f64;
        let add = term / n as f64;
        sum += add;
        if add < 1e-17 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// Diagonal kernel weight: `int Phi g - h^2 sum_{m != 0} Phi(h m) g(h m)` for
/// `g = exp(-r^2 / (2 s^2))`, `s = 4h`.
pub(crate) fn self_weight(k: f64, h: f64) -> Complex64 {
    let s = 4.0 * h;
    let s2 = s * s;
    let x = 0.5 * k * k * s2;
    // int (i/4) H0(k r) g(r) d^2y, using the Hankel-transform closed forms of
    // J0 and Y0 against a Gaussian.
    let exact = (-x).exp() * s2 * Complex64::new(-0.5 * exp_integral_ei(x), 0.5 * PI);
    let m = (12.0 * s / h).ceil() as i64;
    let cutoff = 12.0 * s;
    let mut lattice = Complex64::new(0.0, 0.0);
    for iy in -m..=m {
        for ix in -m..=m {
            if ix == 0 && iy == 0 {
                continue;
            }
            let r = h * (ix as f64).hypot(iy as f64);
            if r > cutoff {
                continue;
            }
            lattice += green_at_distance(k, r) * (-r * r / (2.0 * s2)).exp();
        }
    }
    exact - h * h * lattice
}
