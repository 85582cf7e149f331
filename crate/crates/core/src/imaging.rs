//! Cauchy-data orthogonality sampling indicators and image post-processing.
//!
//! The kernel follows the convention `Im Phi(x, z) = J0(k|x - z|)` in 2D and
//! `(k / 4pi) j0(k|x - z|)` in 3D, i.e. four times the imaginary part of the
//! outgoing Green's function in 2D. Normalized images are unaffected.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    CauchyData, CurveDescriptor, FarFieldPattern, MeasurementCurve, ScatteredData,
};
use crate::pixel::{bilinear, Extent, PixelImage};
use crate::specfun;

/// Space dimension selecting the imaging kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dimension {
    Two,
    Three,
}

impl TryFrom<u32> for Dimension {
    type Error = String;

    fn try_from(n: u32) -> std::result::Result<Self, String> {
        match n {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(format!("dimension must be 2 or 3, got {n}")),
        }
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        match d {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

/// Uniform `n x n` nodes over `extent`, corners included. Row 0 is the top
/// row (largest y), matching the raster convention of `PixelImage`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub extent: Extent,
    pub n: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid {
            extent: Extent::default_domain(),
            n: 64,
        }
    }
}

impl SamplingGrid {
    pub fn new(extent: Extent, n: usize) -> Result<Self> {
        let g = SamplingGrid { extent, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "sampling grid needs n >= 2, got {}",
                self.n
            )));
        }
        if !self.extent.is_nonempty() {
            return Err(Error::Config("sampling extent is empty".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> [f64; 2] {
        let m = (self.n - 1) as f64;
        [self.extent.width() / m, self.extent.height() / m]
    }

    pub fn point(&self, row: usize, col: usize) -> [f64; 2] {
        let [dx, dy] = self.spacing();
        [
            self.extent.min[0] + col as f64 * dx,
            self.extent.max[1] - row as f64 * dy,
        ]
    }

    /// All nodes, row-major.
    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.n * self.n)
            .map(|i| self.point(i / self.n, i % self.n))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorParams {
    pub rho: u32,
    pub dim: Dimension,
    pub normalize: bool,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        IndicatorParams {
            rho: 2,
            dim: Dimension::Two,
            normalize: true,
        }
    }
}

impl IndicatorParams {
    pub fn with_rho(rho: u32) -> Self {
        IndicatorParams {
            rho,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho == 1 || self.rho == 2 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "rho must be 1 or 2, got {}",
                self.rho
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorKind {
    /// Boundary functional with measured normal derivative.
    NearField,
    /// Boundary functional with `du/dnu` replaced by `ik u`.
    FarField,
    /// Far-field orthogonality sampling, `|int e^{ikz.x} u_inf|`.
    Osm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub indicator: IndicatorKind,
    pub rho: u32,
    pub dim: Dimension,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// False when the far-field directions leave a gap in the circle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_coverage: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagingResult {
    pub grid: SamplingGrid,
    /// Row-major, row 0 at the top.
    pub values: Vec<f64>,
    pub normalized: bool,
    /// Set when every value is zero, so normalization was impossible.
    pub degenerate: bool,
    pub provenance: Provenance,
}

impl ImagingResult {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Sampling point of the largest value (first in row-major order on ties).
    pub fn argmax(&self) -> [f64; 2] {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.grid.point(best / self.grid.n, best % self.grid.n)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.n + col]
    }

    /// Writes the values as `OSMI` at `path` (normalized results only) and a
    /// JSON sidecar next to it with extension `json`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let img = self.to_pixel_image()?;
        img.write_osmi(path)?;
        let side = path.with_extension("json");
        let mut text = serde_json::to_string_pretty(&Sidecar {
            grid: self.grid,
            normalized: self.normalized,
            degenerate: self.degenerate,
            provenance: self.provenance.clone(),
        })?;
        text.push('\n');
        fs::write(&side, text).map_err(|e| Error::io(&side, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let side = path.with_extension("json");
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: Sidecar = serde_json::from_str(&text)?;
        let img = PixelImage::read_osmi(path, meta.grid.extent)?;
        if img.width() != meta.grid.n || img.height() != meta.grid.n {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: format!(
                    "image is {}x{}, sidecar says n = {}",
                    img.width(),
                    img.height(),
                    meta.grid.n
                ),
            });
        }
        Ok(ImagingResult {
            grid: meta.grid,
            values: img.values().iter().map(|&v| v as f64).collect(),
            normalized: meta.normalized,
            degenerate: meta.degenerate,
            provenance: meta.provenance,
        })
    }

    /// The sampling-grid values as an `n x n` image; needs values in `[0, 1]`.
    pub fn to_pixel_image(&self) -> Result<PixelImage> {
        if !self.normalized && !self.degenerate {
            return Err(Error::Config(
                "only normalized results can be stored as images".into(),
            ));
        }
        PixelImage::new(
            self.grid.n,
            self.grid.n,
            self.values.iter().map(|&v| v as f32).collect(),
            self.grid.extent,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    grid: SamplingGrid,
    normalized: bool,
    degenerate: bool,
    provenance: Provenance,
}

/// `Im Phi` at distance `r`: `J0(kr)` for n = 2, `(k/4pi) j0(kr)` for n = 3.
pub fn im_phi(dim: Dimension, k: f64, r: f64) -> f64 {
    match dim {
        Dimension::Two => specfun::j0(k * r),
        Dimension::Three => k / (4.0 * PI) * specfun::sph_j0(k * r),
    }
}

/// `grad_x Im Phi(x, z) . nu`.
pub fn im_phi_normal_derivative(
    dim: Dimension,
    k: f64,
    x: [f64; 2],
    z: [f64; 2],
    nu: [f64; 2],
) -> Result<f64> {
    let d = [x[0] - z[0], x[1] - z[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        return Err(Error::Singular("im_phi_normal_derivative"));
    }
    Ok(im_phi_radial(dim, k, r) * (d[0] * nu[0] + d[1] * nu[1]) / r)
}

#[inline]
fn im_phi_radial(dim: Dimension, k: f64, r: f64) -> f64 {
    match dim {
        Dimension::Two => -k * specfun::j1(k * r),
        Dimension::Three => k * k / (4.0 * PI) * specfun::sph_j0_prime(k * r),
    }
}

/// `|gamma|` relating the indicators: `(sqrt(pi) / sqrt(2k))^rho` for n = 2,
/// `(4pi/k)^rho` for n = 3.
pub fn gamma_constant(dim: Dimension, k: f64, rho: u32) -> f64 {
    let base = match dim {
        Dimension::Two => (PI / (2.0 * k)).sqrt(),
        Dimension::Three => 4.0 * PI / k,
    };
    base.powi(rho as i32)
}

fn check_sampling(curve: &MeasurementCurve, grid: &SamplingGrid) -> Result<()> {
    grid.validate()?;
    if grid.extent.max_radius() >= curve.radius() {
        return Err(Error::Geometry(format!(
            "sampling extent reaches radius {:.3}, not inside the measurement circle of radius {}",
            grid.extent.max_radius(),
            curve.radius()
        )));
    }
    let [dx, dy] = grid.spacing();
    let min = 2.0 * dx.max(dy);
    for z in grid.points() {
        for x in curve.points() {
            if (x[0] - z[0]).hypot(x[1] - z[1]) < min {
                return Err(Error::Geometry(format!(
                    "sampling point ({:.3}, {:.3}) is within two cells of a measurement point",
                    z[0], z[1]
                )));
            }
        }
    }
    Ok(())
}

fn finish(
    grid: SamplingGrid,
    values: Vec<f64>,
    params: &IndicatorParams,
    provenance: Provenance,
) -> ImagingResult {
    let degenerate = values.iter().all(|v| *v == 0.0);
    let raw = ImagingResult {
        grid,
        values,
        normalized: false,
        degenerate,
        provenance,
    };
    if params.normalize {
        normalize(&raw)
    } else {
        raw
    }
}

/// Boundary functional `|sum_j w_j (dImPhi/dnu us_j - ImPhi g_j)|^rho` with
/// `g_j = dus_j`.
fn boundary_indicator(
    curve: &MeasurementCurve,
    k: f64,
    us: &[Complex64],
    g: &[Complex64],
    points: &[[f64; 2]],
    params: &IndicatorParams,
) -> Vec<f64> {
    let rho = params.rho as i32;
    let dim = params.dim;
    let pts = curve.points();
    let normals = curve.normals();
    let weights = curve.weights();
    points
        .par_iter()
        .map(|z| {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..pts.len() {
                let x = pts[j];
                let d = [x[0] - z[0], x[1] - z[1]];
                let r = d[0].hypot(d[1]);
                let dn =
                    im_phi_radial(dim, k, r) * (d[0] * normals[j][0] + d[1] * normals[j][1]) / r;
                s += weights[j] * (dn * us[j] - im_phi(dim, k, r) * g[j]);
            }
            s.norm().powi(rho)
        })
        .collect()
}

pub fn indicator_nearfield(
    data: &CauchyData,
    grid: &SamplingGrid,
    params: &IndicatorParams,
) -> Result<ImagingResult> {
    params.validate()?;
    data.validate()?;
    check_sampling(&data.curve, grid)?;
    let values = boundary_indicator(
        &data.curve,
        data.k,
        &data.us,
        &data.dus,
        &grid.points(),
        params,
    );
    Ok(finish(
        *grid,
        values,
        params,
        Provenance {
            indicator: IndicatorKind::NearField,
            rho: params.rho,
            dim: params.dim,
            k: data.k,
            curve: Some(data.curve.descriptor().clone()),
            directions: None,
            full_coverage: None,
        },
    ))
}

/// Unnormalized near-field indicator at arbitrary points inside the curve.
pub fn indicator_nearfield_at(
    data: &CauchyData,
    points: &[[f64; 2]],
    params: &IndicatorParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    data.validate()?;
    let r = data.curve.radius();
    if let Some(z) = points.iter().find(|z| z[0].hypot(z[1]) >= r) {
        return Err(Error::Geometry(format!(
            "point ({:.3}, {:.3}) is not inside the measurement circle of radius {r}",
            z[0], z[1]
        )));
    }
    Ok(boundary_indicator(
        &data.curve,
        data.k,
        &data.us,
        &data.dus,
        points,
        params,
    ))
}

pub fn indicator_farfield(
    data: &ScatteredData,
    grid: &SamplingGrid,
    params: &IndicatorParams,
) -> Result<ImagingResult> {
    params.validate()?;
    let data = ScatteredData::new(data.curve.clone(), data.us.clone(), data.k)?;
    check_sampling(&data.curve, grid)?;
    let ik = Complex64::new(0.0, data.k);
    let g: Vec<Complex64> = data.us.iter().map(|u| ik * u).collect();
    let values = boundary_indicator(&data.curve, data.k, &data.us, &g, &grid.points(), params);
    Ok(finish(
        *grid,
        values,
        params,
        Provenance {
            indicator: IndicatorKind::FarField,
            rho: params.rho,
            dim: params.dim,
            k: data.k,
            curve: Some(data.curve.descriptor().clone()),
            directions: None,
            full_coverage: None,
        },
    ))
}

/// `|sum_j w_j e^{ik z.x_j} u_inf(x_j)|`, no exponent applied.
pub fn indicator_osm(
    ff: &FarFieldPattern,
    grid: &SamplingGrid,
    params: &IndicatorParams,
) -> Result<ImagingResult> {
    params.validate()?;
    grid.validate()?;
    if ff.directions.len() != ff.values.len() {
        return Err(Error::Config(format!(
            "{} directions for {} far-field values",
            ff.directions.len(),
            ff.values.len()
        )));
    }
    let (weights, full) = ff.angular_weights();
    let k = ff.k;
    let values = grid
        .points()
        .par_iter()
        .map(|z| {
            let mut s = Complex64::new(0.0, 0.0);
            for ((d, u), w) in ff.directions.iter().zip(&ff.values).zip(&weights) {
                s += w * Complex64::from_polar(1.0, k * (z[0] * d[0] + z[1] * d[1])) * u;
            }
            s.norm()
        })
        .collect();
    Ok(finish(
        *grid,
        values,
        params,
        Provenance {
            indicator: IndicatorKind::Osm,
            rho: params.rho,
            dim: params.dim,
            k,
            curve: None,
            directions: Some(ff.directions.len()),
            full_coverage: Some(full),
        },
    ))
}

/// Divides by the maximum. All-zero input comes back flagged degenerate.
pub fn normalize(result: &ImagingResult) -> ImagingResult {
    let mut out = result.clone();
    let m = result.max();
    if m > 0.0 {
        out.values.iter_mut().for_each(|v| *v /= m);
        out.degenerate = false;
        out.normalized = true;
    } else {
        out.degenerate = true;
        out.normalized = false;
    }
    out
}

/// Bilinear interpolation of the sampling-grid nodes onto the pixel centers
/// of a `target x target` raster over the same extent, rescaled to max 1.
pub fn upsample_bilinear(result: &ImagingResult, target: usize) -> Result<PixelImage> {
    if target < 1 {
        return Err(Error::Config("target resolution must be positive".into()));
    }
    let src = result.to_pixel_image()?;
    let n = result.grid.n;
    let (e, [dx, dy]) = (result.grid.extent, result.grid.spacing());
    let mut out = vec![0.0f32; target * target];
    let (pw, ph) = (e.width() / target as f64, e.height() / target as f64);
    for row in 0..target {
        let y = e.max[1] - (row as f64 + 0.5) * ph;
        let r = (e.max[1] - y) / dy;
        for col in 0..target {
            let x = e.min[0] + (col as f64 + 0.5) * pw;
            let c = (x - e.min[0]) / dx;
            out[row * target + col] = bilinear(src.values(), n, n, r, c).clamp(0.0, 1.0) as f32;
        }
    }
    let m = out.iter().cloned().fold(0.0f32, f32::max);
    if m > 0.0 {
        out.iter_mut().for_each(|v| *v = (*v / m).min(1.0));
    }
    PixelImage::new(target, target, out, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    const J0_ROOT: f64 = 2.404_825_557_695_773;
    const J1_ROOT: f64 = 3.831_705_970_207_512;

    #[test]
    fn kernel_values() {
        assert_eq!(im_phi(Dimension::Two, 3.0, 0.0), 1.0);
        assert!((im_phi(Dimension::Three, 6.0, 0.0) - 0.477_464_829_275_686).abs() < 1e-12);
        assert!(im_phi(Dimension::Two, 6.0, J0_ROOT / 6.0).abs() < 1e-9);
        let d = im_phi_normal_derivative(
            Dimension::Two,
            6.0,
            [J1_ROOT / 6.0, 0.0],
            [0.0, 0.0],
            [1.0, 0.0],
        )
        .unwrap();
        assert!(d.abs() < 1e-9);
        let perp = im_phi_normal_derivative(
            Dimension::Two,
            6.0,
            [1.0, 1.0],
            [0.0, 0.0],
            [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        )
        .unwrap();
        assert!(perp.abs() < 1e-14);
        assert!(
            im_phi_normal_derivative(Dimension::Two, 1.0, [1.0, 1.0], [1.0, 1.0], [1.0, 0.0])
                .is_err()
        );
    }

    #[test]
    fn kernel_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for dim in [Dimension::Two, Dimension::Three] {
            for _ in 0..50 {
                let k = rng.random_range(1.0..8.0);
                let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let z = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let nu = [a.cos(), a.sin()];
                let f = |s: f64| {
                    let p = [x[0] + s * nu[0], x[1] + s * nu[1]];
                    im_phi(dim, k, (p[0] - z[0]).hypot(p[1] - z[1]))
                };
                let fd = (f(h) - f(-h)) / (2.0 * h);
                let an = im_phi_normal_derivative(dim, k, x, z, nu).unwrap();
                assert!((fd - an).abs() < 1e-7, "{fd} vs {an}");
            }
        }
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_constant(Dimension::Two, 6.0, 2) - PI / 12.0).abs() < 1e-15);
        assert!((gamma_constant(Dimension::Three, 4.0 * PI, 1) - 1.0).abs() < 1e-15);
        let g1 = gamma_constant(Dimension::Two, 3.3, 1);
        assert!((g1 * g1 - gamma_constant(Dimension::Two, 3.3, 2)).abs() < 1e-15);
    }

    #[test]
    fn grid_orientation() {
        let g = SamplingGrid::default();
        assert_eq!(g.point(0, 0), [-2.0, 2.0]);
        assert_eq!(g.point(63, 63), [2.0, -2.0]);
        assert!(SamplingGrid::new(Extent::default_domain(), 1).is_err());
    }

    #[test]
    fn zero_data_is_degenerate() {
        let curve = MeasurementCurve::circle(100.0, 32).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 32];
        let data = CauchyData::new(curve, z.clone(), z, 6.0).unwrap();
        let r = indicator_nearfield(&data, &SamplingGrid::default(), &IndicatorParams::default())
            .unwrap();
        assert!(r.degenerate && !r.normalized);
        assert!(r.values.iter().all(|v| *v == 0.0));
        let up = upsample_bilinear(&r, 160).unwrap();
        assert_eq!(up.count_nonzero(), 0);
        let f = indicator_farfield(
            &data.scattered_only(),
            &SamplingGrid::default(),
            &IndicatorParams::default(),
        )
        .unwrap();
        assert!(f.degenerate);
    }

    #[test]
    fn rejects_bad_geometry_and_rho() {
        let curve = MeasurementCurve::circle(2.5, 32).unwrap();
        let z = vec![Complex64::new(1.0, 0.0); 32];
        let data = CauchyData::new(curve, z.clone(), z, 6.0).unwrap();
        assert!(matches!(
            indicator_nearfield(&data, &SamplingGrid::default(), &IndicatorParams::default()),
            Err(Error::Geometry(_))
        ));
        let far = CauchyData::new(
            MeasurementCurve::circle(100.0, 4).unwrap(),
            vec![Complex64::new(1.0, 0.0); 4],
            vec![Complex64::new(1.0, 0.0); 4],
            6.0,
        )
        .unwrap();
        assert!(indicator_nearfield(
            &far,
            &SamplingGrid::default(),
            &IndicatorParams::with_rho(3)
        )
        .is_err());
    }

    fn synthetic(values: Vec<f64>, n: usize) -> ImagingResult {
        ImagingResult {
            grid: SamplingGrid {
                extent: Extent::default_domain(),
                n,
            },
            values,
            normalized: false,
            degenerate: false,
            provenance: Provenance {
                indicator: IndicatorKind::NearField,
                rho: 2,
                dim: Dimension::Two,
                k: 6.0,
                curve: None,
                directions: None,
                full_coverage: None,
            },
        }
    }

    #[test]
    fn normalize_and_upsample() {
        let c = normalize(&synthetic(vec![0.37; 16], 4));
        assert!(c.normalized && c.values.iter().all(|v| *v == 1.0));
        let up = upsample_bilinear(&c, 160).unwrap();
        assert_eq!((up.width(), up.height()), (160, 160));
        assert!(up.values().iter().all(|v| *v == 1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = normalize(&synthetic(
            (0..64).map(|_| rng.random_range(0.0..5.0)).collect(),
            8,
        ));
        assert_eq!(normalize(&r), r);
        assert_eq!(r.max(), 1.0);
        assert!(upsample_bilinear(&synthetic(vec![2.0; 4], 2), 4).is_err());
    }

    #[test]
    fn upsample_is_exact_for_linear_ramps() {
        let n = 5;
        let g = SamplingGrid::default();
        let g = SamplingGrid { n, ..g };
        let vals: Vec<f64> = (0..n * n)
            .map(|i| {
                let p = g.point(i / n, i % n);
                0.1 + 0.05 * (p[0] + 2.0) + 0.1 * (p[1] + 2.0)
            })
            .collect();
        let mut r = synthetic(vals, n);
        r.normalized = true;
        let up = upsample_bilinear(&r, 16).unwrap();
        let ramp = |p: [f64; 2]| 0.1 + 0.05 * (p[0] + 2.0) + 0.1 * (p[1] + 2.0);
        // Brightest pixel center is the top-right one.
        let top = ramp(up.pixel_center(0, 15));
        for row in 0..16 {
            for col in 0..16 {
                let expect = ramp(up.pixel_center(row, col)) / top;
                assert!((up.get(row, col) as f64 - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn result_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.osmi");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = normalize(&synthetic(
            (0..16).map(|_| rng.random_range(0.0..1.0)).collect(),
            4,
        ));
        r.write(&path).unwrap();
        let back = ImagingResult::read(&path).unwrap();
        assert_eq!(back.provenance, r.provenance);
        for (a, b) in back.values.iter().zip(&r.values) {
            assert!((a - b).abs() < 1e-7);
        }
        assert!(dir.path().join("img.json").exists());
    }
}
