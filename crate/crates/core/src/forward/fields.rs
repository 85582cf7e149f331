//! Scattered field, its normal derivative and the far-field pattern from a
//! solved total field, by rectangle-rule quadrature over the contrast support.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;

use super::curve::{CauchyData, FarFieldPattern, MeasurementCurve};
use super::green::{green_at_distance, green_radial_derivative};
use super::grid::ContrastGrid;
use super::solver::TotalField;
use crate::error::{Error, Result};

/// Nodes carrying `h^2 eta u`.
struct Sources {
    points: Vec<[f64; 2]>,
    density: Vec<Complex64>,
}

fn sources(total: &TotalField, grid: &ContrastGrid) -> Result<Sources> {
    if total.geometry != grid.geometry() {
        return Err(Error::Config(
            "total field and contrast live on different grids".into(),
        ));
    }
    let g = grid.geometry();
    let w = g.h * g.h;
    let eta = grid.eta();
    Ok(Sources {
        points: grid.support().iter().map(|&i| g.node_at(i)).collect(),
        density: grid
            .support()
            .iter()
            .map(|&i| w * eta[i] * total.u[i])
            .collect(),
    })
}

fn check_clearance(grid: &ContrastGrid, points: &[[f64; 2]]) -> Result<()> {
    let min = 2.0 * grid.h();
    for p in points {
        let d = grid.distance_to_support(*p);
        if d < min {
            return Err(Error::Accuracy(format!(
                "point ({:.4}, {:.4}) is {d:.3e} from the contrast support, closer than 2h = {min:.3e}",
                p[0], p[1]
            )));
        }
    }
    Ok(())
}

/// `u_sc(x) = k^2 h^2 sum_j Phi(x, y_j) eta_j u_j`.
pub fn scattered_at(
    total: &TotalField,
    grid: &ContrastGrid,
    points: &[[f64; 2]],
) -> Result<Vec<Complex64>> {
    let src = sources(total, grid)?;
    check_clearance(grid, points)?;
    let k = total.k;
    Ok(points
        .par_iter()
        .map(|x| {
            let s: Complex64 = src
                .points
                .iter()
                .zip(&src.density)
                .map(|(y, f)| green_at_distance(k, (x[0] - y[0]).hypot(x[1] - y[1])) * f)
                .sum();
            k * k * s
        })
        .collect())
}

/// `du_sc/dnu` at the curve points along the curve normals.
pub fn scattered_normal_derivative(
    total: &TotalField,
    grid: &ContrastGrid,
    curve: &MeasurementCurve,
) -> Result<Vec<Complex64>> {
    let src = sources(total, grid)?;
    check_clearance(grid, curve.points())?;
    let k = total.k;
    Ok(curve
        .points()
        .par_iter()
        .zip(curve.normals().par_iter())
        .map(|(x, nu)| {
            let s: Complex64 = src
                .points
                .iter()
                .zip(&src.density)
                .map(|(y, f)| {
                    let d = [x[0] - y[0], x[1] - y[1]];
                    let r = d[0].hypot(d[1]);
                    green_radial_derivative(k, r) * ((d[0] * nu[0] + d[1] * nu[1]) / r) * f
                })
                .sum();
            k * k * s
        })
        .collect())
}

/// Both traces on `curve`.
pub fn cauchy_data(
    total: &TotalField,
    grid: &ContrastGrid,
    curve: &MeasurementCurve,
) -> Result<CauchyData> {
    let us = scattered_at(total, grid, curve.points())?;
    let dus = scattered_normal_derivative(total, grid, curve)?;
    CauchyData::new(curve.clone(), us, dus, total.k)
}

/// `e^{i pi/4} / sqrt(8 pi k)`, the 2D far-field normalization.
pub fn far_field_alpha(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * std::f64::consts::PI * k).sqrt(), FRAC_PI_4)
}

pub fn far_field(
    total: &TotalField,
    grid: &ContrastGrid,
    directions: &[[f64; 2]],
) -> Result<FarFieldPattern> {
    let src = sources(total, grid)?;
    for d in directions {
        if (d[0].hypot(d[1]) - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "far-field direction ({}, {}) is not a unit vector",
                d[0], d[1]
            )));
        }
    }
    let k = total.k;
    let pre = far_field_alpha(k) * k * k;
    let values = directions
        .par_iter()
        .map(|d| {
            let s: Complex64 = src
                .points
                .iter()
                .zip(&src.density)
                .map(|(y, f)| Complex64::from_polar(1.0, -k * (y[0] * d[0] + y[1] * d[1])) * f)
                .sum();
            pre * s
        })
        .collect();
    Ok(FarFieldPattern {
        directions: directions.to_vec(),
        values,
        k,
    })
}
