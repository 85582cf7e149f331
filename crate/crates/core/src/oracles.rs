//! Numerical checks of the identities behind the imaging functionals.
//!
//! Each check returns a `CheckReport`. The two sides of every comparison are
//! computed through separate code paths: volume sums over the solver grid on
//! one side, boundary or far-field quadrature on the other.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::add_noise;
use crate::error::{Error, Result};
use crate::forward::{
    cauchy_data, far_field, green2d, green2d_normal_derivative, incident_plane_wave, scattered_at,
    solve_scene, uniform_directions, CauchyData, ContrastGrid, ForwardConfig, MeasurementCurve,
    MieDisk, Solution, TotalField,
};
use crate::imaging::{
    gamma_constant, im_phi, indicator_nearfield, indicator_nearfield_at, indicator_osm, normalize,
    Dimension, ImagingResult, IndicatorParams, SamplingGrid,
};
use crate::scene::{ContrastScene, ShapePrimitive};
use crate::specfun;

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub label: String,
    pub computed: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// What `max_error` measures, e.g. "relative" or "absolute".
    pub metric: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn new(name: &str, metric: &str, tolerance: f64, diagnostics: Vec<Diagnostic>) -> Self {
        let max_error = diagnostics.iter().map(|d| d.error).fold(0.0, f64::max);
        let max_error = if diagnostics.iter().any(|d| d.error.is_nan()) {
            f64::NAN
        } else {
            max_error
        };
        CheckReport {
            name: name.into(),
            metric: metric.into(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
            notes: Vec::new(),
            diagnostics,
        }
    }

    /// One report holding every diagnostic and note of `parts`.
    pub fn merge(name: &str, parts: Vec<CheckReport>) -> Self {
        let metric = parts.first().map_or(String::new(), |p| p.metric.clone());
        let tolerance = parts
            .iter()
            .map(|p| p.tolerance)
            .fold(f64::INFINITY, f64::min);
        let mut notes = Vec::new();
        let mut diagnostics = Vec::new();
        let mut pass = true;
        for p in parts {
            pass &= p.pass;
            notes.extend(p.notes);
            diagnostics.extend(p.diagnostics);
        }
        let mut r = CheckReport::new(name, &metric, tolerance, diagnostics);
        r.pass &= pass;
        r.notes = notes;
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// `[PASS]`/`[FAIL]` summary line.
    pub fn summary(&self) -> String {
        format!(
            "[{}] {}: max {} error {:.3e} (tolerance {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.max_error,
            self.tolerance
        )
    }
}

fn relative(computed: f64, reference: f64) -> f64 {
    let diff = (computed - reference).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.abs()
    }
}

/// Shared settings of the pipeline-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub k: f64,
    /// Incident direction, radians.
    pub theta: f64,
    pub forward: ForwardConfig,
    pub radius: f64,
    pub count: usize,
    pub grid: SamplingGrid,
    pub directions: usize,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub theorem1: f64,
    pub theorem2: f64,
    pub funk_hecke: f64,
    pub helmholtz: f64,
    pub decay: f64,
    pub noise_correlation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            theorem1: 0.01,
            theorem2: 0.02,
            funk_hecke: 1e-8,
            helmholtz: 1e-6,
            decay: 0.15,
            noise_correlation: 0.90,
        }
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            k: 6.0,
            theta: FRAC_PI_2,
            forward: ForwardConfig::default(),
            radius: 100.0,
            count: 32,
            grid: SamplingGrid::default(),
            directions: 128,
            tolerances: Tolerances::default(),
        }
    }
}

impl OracleConfig {
    pub fn curve(&self) -> Result<MeasurementCurve> {
        MeasurementCurve::circle(self.radius, self.count)
    }

    pub fn solve(&self, scene: &ContrastScene) -> Result<Solution> {
        solve_scene(scene, self.k, self.theta, &self.forward)
    }

    pub fn cauchy(&self, sol: &Solution) -> Result<CauchyData> {
        cauchy_data(&sol.total, &sol.grid, &self.curve()?)
    }
}

/// Power-series references for the special functions, independent of the
/// recurrences and asymptotics in `specfun`.
pub mod series {

    use std::f64::consts::PI;

    const TERMS: usize = 40;
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    pub fn j0(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..TERMS {
            term *= q / (m * m) as f64;
            sum += term;
        }
        sum
    }

    pub fn j1(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 0.5 * x;
        let mut sum = term;
        for m in 1..TERMS {
            term *= q / (m * (m + 1)) as f64;
            sum += term;
        }
        sum
    }

    pub fn y0(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for m in 1..TERMS {
            term *= q / (m * m) as f64;
            harmonic += 1.0 / m as f64;
            sum -= harmonic * term;
        }
        2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j0(x) + sum)
    }

    pub fn y1(x: f64) -> f64 {
        // psi(m+1) + psi(m+2) = -2 gamma + H_m + H_{m+1}
        let q = -0.25 * x * x;
        let mut term = 0.5 * x;
        let mut h_m = 0.0;
        let mut sum = term * (-2.0 * EULER_GAMMA + 1.0);
        for m in 1..TERMS {
            term *= q / (m * (m + 1)) as f64;
            h_m += 1.0 / m as f64;
            let h_next = h_m + 1.0 / (m + 1) as f64;
            sum += term * (-2.0 * EULER_GAMMA + h_m + h_next);
        }
        -2.0 / (PI * x) + 2.0 / PI * (0.5 * x).ln() * j1(x) - sum / PI
    }

    /// `sin(x)/x` by its Taylor series.
    pub fn spherical_j0(x: f64) -> f64 {
        let q = -x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..TERMS {
            term *= q / ((2 * m) * (2 * m + 1)) as f64;
            sum += term;
        }
        sum
    }
}

/// Every `specfun` routine against the power series on `(0, 8]`, and the
/// Wronskian `J1 Y0 - J0 Y1 = 2 / (pi x)` on `[0.1, 100]`.
pub fn check_specfun(samples: usize) -> Result<Vec<CheckReport>> {
    let mut diags = Vec::new();
    let mut push = |name: &str, x: f64, got: f64, want: f64| {
        diags.push(Diagnostic {
            label: format!("{name}({x})"),
            computed: got,
            reference: want,
            error: (got - want).abs(),
        })
    };
    for i in 1..=samples {
        let x = 8.0 * i as f64 / samples as f64;
        let (j0, j1, y0, y1) = (series::j0(x), series::j1(x), series::y0(x), series::y1(x));
        push("J0", x, specfun::bessel_j0(x)?, j0);
        push("J1", x, specfun::bessel_j1(x)?, j1);
        push("Y0", x, specfun::bessel_y0(x)?, y0);
        push("Y1", x, specfun::bessel_y1(x)?, y1);
        let (h0, h1) = (specfun::hankel1(0, x)?, specfun::hankel1(1, x)?);
        push("ReH0", x, h0.re, j0);
        push("ImH0", x, h0.im, y0);
        push("ReH1", x, h1.re, j1);
        push("ImH1", x, h1.im, y1);
        push("j0", x, specfun::spherical_j0(x)?, series::spherical_j0(x));
    }
    let series_report = CheckReport::new("specfun-series", "absolute", 1e-10, diags);
    let mut w = Vec::new();
    for i in 0..samples {
        let x = 0.1 * 1000f64.powf(i as f64 / (samples - 1) as f64);
        let got = specfun::bessel_j1(x)? * specfun::bessel_y0(x)?
            - specfun::bessel_j0(x)? * specfun::bessel_y1(x)?;
        let want = 2.0 / (std::f64::consts::PI * x);
        w.push(Diagnostic {
            label: format!("W({x:.4})"),
            computed: got,
            reference: want,
            error: (got - want).abs(),
        });
    }
    Ok(vec![
        series_report,
        CheckReport::new("specfun-wronskian", "absolute", 1e-9, w),
    ])
}

/// Relative L2 error of the scattered field on the measurement circle
/// against the Mie series, for each solver size. Passes when the error at
/// the second size is within `tolerance` and the errors decrease.
pub fn check_mie(
    cfg: &OracleConfig,
    eta: f64,
    sizes: &[usize],
    tolerance: f64,
) -> Result<CheckReport> {
    let scene = disk_scene(1.0, eta)?;
    let curve = cfg.curve()?;
    let reference = MieDisk::new(cfg.k, 1.0, eta)?.scattered(cfg.theta, curve.points())?;
    let mut diagnostics = Vec::new();
    let mut errors = Vec::new();
    for &n in sizes {
        let sol = solve_scene(
            &scene,
            cfg.k,
            cfg.theta,
            &ForwardConfig { n, ..cfg.forward },
        )?;
        let us = scattered_at(&sol.total, &sol.grid, curve.points())?;
        let num: f64 = us
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
        let e = (num / den).sqrt();
        errors.push(e);
        diagnostics.push(Diagnostic {
            label: format!("N = {n}"),
            computed: e,
            reference: 0.0,
            error: e,
        });
    }
    let at = sizes.len().min(2) - 1;
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let mut report = CheckReport::new(
        "forward-mie",
        "relative L2",
        tolerance,
        vec![diagnostics[at].clone()],
    );
    report.diagnostics = diagnostics;
    report.pass = errors[at] <= tolerance && monotone;
    report.max_error = errors[at];
    Ok(report.with_note(format!("errors {errors:?}, decreasing: {monotone}")))
}

/// Centered disk of radius `radius` and real contrast `eta` on `[-2, 2]^2`.
pub fn disk_scene(radius: f64, eta: f64) -> Result<ContrastScene> {
    ContrastScene::default().with_shape(
        ShapePrimitive::disk([0.0, 0.0], radius)?,
        Complex64::new(eta, 0.0),
    )
}

/// `|k^2 h^2 sum_j ImPhi(y_j, z) eta_j u_j|^rho`.
pub fn theorem1_rhs(
    total: &TotalField,
    grid: &ContrastGrid,
    z: [f64; 2],
    params: &IndicatorParams,
) -> f64 {
    theorem1_rhs_many(total, grid, &[z], params)[0]
}

pub fn theorem1_rhs_many(
    total: &TotalField,
    grid: &ContrastGrid,
    points: &[[f64; 2]],
    params: &IndicatorParams,
) -> Vec<f64> {
    let g = grid.geometry();
    let eta = grid.eta();
    let k = total.k;
    let w = k * k * g.h * g.h;
    let sources: Vec<([f64; 2], Complex64)> = grid
        .support()
        .iter()
        .map(|&i| (g.node_at(i), w * eta[i] * total.u[i]))
        .collect();
    points
        .par_iter()
        .map(|z| {
            let s: Complex64 = sources
                .iter()
                .map(|(y, f)| im_phi(params.dim, k, (y[0] - z[0]).hypot(y[1] - z[1])) * f)
                .sum();
            s.norm().powi(params.rho as i32)
        })
        .collect()
}

/// Pointwise comparison of the boundary indicator with the volume integral.
pub fn check_theorem1(
    scene: &ContrastScene,
    cfg: &OracleConfig,
    params: &IndicatorParams,
) -> Result<CheckReport> {
    let params = IndicatorParams {
        normalize: false,
        ..*params
    };
    let sol = cfg.solve(scene)?;
    let data = cfg.cauchy(&sol)?;
    let lhs = indicator_nearfield(&data, &cfg.grid, &params)?;
    let points = cfg.grid.points();
    let rhs = theorem1_rhs_many(&sol.total, &sol.grid, &points, &params);
    let diagnostics = points
        .iter()
        .zip(lhs.values.iter().zip(&rhs))
        .map(|(z, (&a, &b))| Diagnostic {
            label: format!("z=({:.4},{:.4})", z[0], z[1]),
            computed: a,
            reference: b,
            error: relative(a, b),
        })
        .collect();
    Ok(CheckReport::new(
        "theorem1",
        "relative",
        cfg.tolerances.theorem1,
        diagnostics,
    ))
}

/// Which way round the Theorem 2 constant is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem2Form {
    /// `I(z)` against `gamma |I_OSM(z)|^rho`.
    AsPrinted,
    /// `gamma I(z)` against `|I_OSM(z)|^rho`, the form the substitution
    /// `u_inf = alpha k^2 int e^{-iky.x} eta u` actually yields.
    Reciprocal,
}

/// Compares already computed indicators over the sampling grid.
pub fn theorem2_report(
    near: &ImagingResult,
    osm: &ImagingResult,
    params: &IndicatorParams,
    form: Theorem2Form,
    tolerance: f64,
) -> Result<CheckReport> {
    if near.normalized || osm.normalized || near.grid != osm.grid {
        return Err(Error::Config(
            "Theorem 2 needs unnormalized indicators on one grid".into(),
        ));
    }
    let k = near.provenance.k;
    let gamma = gamma_constant(params.dim, k, params.rho);
    let rho = params.rho as i32;
    let diagnostics = near
        .values
        .iter()
        .zip(&osm.values)
        .enumerate()
        .map(|(i, (&a, &b))| {
            let z = near.grid.point(i / near.grid.n, i % near.grid.n);
            let (computed, reference) = match form {
                Theorem2Form::AsPrinted => (a, gamma * b.powi(rho)),
                Theorem2Form::Reciprocal => (gamma * a, b.powi(rho)),
            };
            Diagnostic {
                label: format!("z=({:.4},{:.4})", z[0], z[1]),
                computed,
                reference,
                error: relative(computed, reference),
            }
        })
        .collect();
    let name = match form {
        Theorem2Form::AsPrinted => "theorem2",
        Theorem2Form::Reciprocal => "theorem2-reciprocal",
    };
    let mut report = CheckReport::new(name, "relative", tolerance, diagnostics).with_note(format!(
        "gamma = {gamma:.10} (n = {}, k = {k}, rho = {rho})",
        u32::from(params.dim)
    ));
    if osm.provenance.full_coverage == Some(false) {
        report = report.with_note("far-field directions do not cover the full circle");
    }
    Ok(report)
}

/// Boundary indicator from Cauchy data against the far-field OSM indicator
/// with `n_directions` equispaced directions, both from one forward solve.
pub fn check_theorem2(
    scene: &ContrastScene,
    cfg: &OracleConfig,
    params: &IndicatorParams,
    n_directions: usize,
    form: Theorem2Form,
) -> Result<CheckReport> {
    let params = IndicatorParams {
        normalize: false,
        ..*params
    };
    let sol = cfg.solve(scene)?;
    let data = cfg.cauchy(&sol)?;
    let near = indicator_nearfield(&data, &cfg.grid, &params)?;
    let ff = far_field(&sol.total, &sol.grid, &uniform_directions(n_directions))?;
    let osm = indicator_osm(&ff, &cfg.grid, &params)?;
    theorem2_report(&near, &osm, &params, form, cfg.tolerances.theorem2)
}

/// Rectangle rule for `int_{S^1} e^{-ik x.z} ds(z)` against `2 pi J0(k|x|)`.
pub fn check_funk_hecke(
    k: f64,
    x: [f64; 2],
    m_nodes: usize,
    tolerance: f64,
) -> Result<CheckReport> {
    if m_nodes < 8 {
        return Err(Error::Config(format!(
            "Funk-Hecke check needs at least 8 nodes, got {m_nodes}"
        )));
    }
    let w = TAU / m_nodes as f64;
    let q: Complex64 = uniform_directions(m_nodes)
        .iter()
        .map(|d| Complex64::from_polar(w, -k * (x[0] * d[0] + x[1] * d[1])))
        .sum();
    let exact = TAU * specfun::bessel_j0(k * x[0].hypot(x[1]))?;
    Ok(CheckReport::new(
        "funk-hecke",
        "absolute",
        tolerance,
        vec![
            Diagnostic {
                label: "real part".into(),
                computed: q.re,
                reference: exact,
                error: (q.re - exact).abs(),
            },
            Diagnostic {
                label: "imaginary part".into(),
                computed: q.im,
                reference: 0.0,
                error: q.im.abs(),
            },
        ],
    )
    .with_note(format!(
        "k = {k}, |x| = {}, nodes = {m_nodes}",
        x[0].hypot(x[1])
    )))
}

/// Green's representation `w(x) = int (dw/dnu Phi(x, y) - w dPhi(x, y)/dnu(y)) ds(y)`
/// on the circle of radius `radius` for the plane wave `w` with direction `theta`.
pub fn check_helmholtz_representation(
    k: f64,
    radius: f64,
    m_nodes: usize,
    x: [f64; 2],
    theta: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    if x[0].hypot(x[1]) >= radius {
        return Err(Error::Geometry(
            "test point must lie inside the circle".into(),
        ));
    }
    let curve = MeasurementCurve::circle(radius, m_nodes)?;
    let w = incident_plane_wave(k, theta, curve.points());
    let dir = [theta.cos(), theta.sin()];
    let mut q = Complex64::new(0.0, 0.0);
    for (((y, nu), wt), wy) in curve
        .points()
        .iter()
        .zip(curve.normals())
        .zip(curve.weights())
        .zip(&w)
    {
        let dw = Complex64::new(0.0, k * (dir[0] * nu[0] + dir[1] * nu[1])) * wy;
        let phi = green2d(k, *y, x)?;
        let dphi = green2d_normal_derivative(k, *y, x, *nu)?;
        q += wt * (dw * phi - wy * dphi);
    }
    let exact = incident_plane_wave(k, theta, &[x])[0];
    let err = (q - exact).norm();
    Ok(CheckReport::new(
        "helmholtz-representation",
        "absolute",
        tolerance,
        vec![Diagnostic {
            label: format!("x=({},{}) |q - w(x)|", x[0], x[1]),
            computed: q.norm(),
            reference: exact.norm(),
            error: err,
        }],
    )
    .with_note(format!("k = {k}, R = {radius}, nodes = {m_nodes}")))
}

/// Least-squares line through the log-log envelope of a decaying profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Envelope samples used in the fit.
    pub maxima: usize,
}

/// Envelope points are strict local maxima (`v[i-1] < v[i] >= v[i+1]`). A
/// profile that never rises is already its own envelope and is used whole.
pub fn decay_fit(distances: &[f64], values: &[f64]) -> Result<DecayFit> {
    if distances.len() != values.len() {
        return Err(Error::Config(
            "distances and values differ in length".into(),
        ));
    }
    if distances
        .iter()
        .zip(values)
        .any(|(d, v)| !(*d > 0.0) || !(*v >= 0.0))
    {
        return Err(Error::Config(
            "decay fit needs positive distances and nonnegative values".into(),
        ));
    }
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let idx: Vec<usize> = if monotone {
        (0..values.len()).collect()
    } else {
        (1..values.len().saturating_sub(1))
            .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
            .collect()
    };
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| values[i] > 0.0)
        .map(|&i| (distances[i].ln(), values[i].ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} envelope points, need at least 5",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        maxima: pts.len(),
    })
}

/// Indicator along the ray `c + t d` from the scene's bounding-box center,
/// sampled where the distance to the contrast support lies in
/// `[d_min, d_max]`. Returns `(distances, values)`.
pub fn ray_profile(
    sol: &Solution,
    data: &CauchyData,
    direction: [f64; 2],
    params: &IndicatorParams,
    (d_min, d_max): (f64, f64),
    samples: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if sol.grid.is_zero() {
        return Err(Error::InsufficientData("scene has no contrast".into()));
    }
    let norm = direction[0].hypot(direction[1]);
    let d = [direction[0] / norm, direction[1] / norm];
    let g = sol.grid.geometry();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &i in sol.grid.support() {
        let p = g.node_at(i);
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let reach = 0.5 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    // Distance to the support grows with slope at most 1 along the ray, so a
    // parameter window [d_min, d_max + reach] contains every admissible point.
    let step = (d_max + reach - d_min) / (4 * samples) as f64;
    let mut ts = Vec::new();
    let mut t = d_min;
    while t <= d_max + reach + 1e-12 {
        ts.push(t);
        t += step;
    }
    let pts: Vec<[f64; 2]> = ts
        .iter()
        .map(|t| [c[0] + t * d[0], c[1] + t * d[1]])
        .collect();
    let dists: Vec<f64> = pts
        .par_iter()
        .map(|p| sol.grid.distance_to_support(*p))
        .collect();
    let keep: Vec<usize> = (0..pts.len())
        .filter(|&i| dists[i] >= d_min && dists[i] <= d_max)
        .collect();
    // Resample to the requested count, uniformly in the kept window.
    let chosen: Vec<usize> = if keep.len() <= samples {
        keep
    } else {
        (0..samples)
            .map(|j| keep[j * (keep.len() - 1) / (samples - 1)])
            .collect()
    };
    let z: Vec<[f64; 2]> = chosen.iter().map(|&i| pts[i]).collect();
    let values = indicator_nearfield_at(data, &z, params)?;
    Ok((chosen.iter().map(|&i| dists[i]).collect(), values))
}

/// Decay exponent of the indicator along a ray against `-rho (n - 1) / 2`.
/// Uses a dense circle so the boundary quadrature resolves sampling points
/// far from the scatterer.
pub fn check_decay(
    scene: &ContrastScene,
    cfg: &OracleConfig,
    params: &IndicatorParams,
    direction: [f64; 2],
    dense_count: usize,
) -> Result<CheckReport> {
    let sol = cfg.solve(scene)?;
    let curve = MeasurementCurve::circle(cfg.radius, dense_count)?;
    let data = cauchy_data(&sol.total, &sol.grid, &curve)?;
    let (d, v) = ray_profile(&sol, &data, direction, params, (5.0, 50.0), 400)?;
    let fit = decay_fit(&d, &v)?;
    let n = match params.dim {
        Dimension::Two => 2.0,
        Dimension::Three => 3.0,
    };
    let expected = -(params.rho as f64) * (n - 1.0) / 2.0;
    Ok(CheckReport::new(
        &format!("decay-rho{}", params.rho),
        "relative",
        cfg.tolerances.decay,
        vec![Diagnostic {
            label: format!("slope along ({:.3},{:.3})", direction[0], direction[1]),
            computed: fit.slope,
            reference: expected,
            error: relative(fit.slope, expected),
        }],
    )
    .with_note(format!(
        "{} envelope maxima over distances 5..50",
        fit.maxima
    )))
}

/// Pearson correlation; two constant images correlate 1 if equal, else 0.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    sab / (saa * sbb).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStability {
    pub deltas: Vec<f64>,
    /// `correlations[s][i]` for seed `s` and `deltas[i]`.
    pub correlations: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

impl NoiseStability {
    /// Two reports: the mean correlation at the first noise level against the
    /// threshold, and monotone degradation of the means over `deltas`.
    pub fn reports(&self, threshold: f64) -> Vec<CheckReport> {
        let first = self.mean.first().copied().unwrap_or(1.0);
        let level = CheckReport::new(
            "noise-correlation",
            "1 - mean correlation",
            1.0 - threshold,
            vec![Diagnostic {
                label: format!("delta = {}", self.deltas.first().copied().unwrap_or(0.0)),
                computed: first,
                reference: 1.0,
                error: 1.0 - first,
            }],
        );
        let steps = self
            .mean
            .windows(2)
            .zip(self.deltas.windows(2))
            .map(|(m, d)| Diagnostic {
                label: format!("delta {} -> {}", d[0], d[1]),
                computed: m[1],
                reference: m[0],
                error: (m[1] - m[0]).max(0.0),
            })
            .collect();
        vec![
            level,
            CheckReport::new("noise-monotone", "correlation increase", 0.0, steps),
        ]
    }
}

/// Correlation of the normalized clean image with noisy ones. Every seed
/// draws one noise realization shared by all `deltas`, so the levels differ
/// only in amplitude.
pub fn noise_stability(
    scene: &ContrastScene,
    cfg: &OracleConfig,
    params: &IndicatorParams,
    deltas: &[f64],
    seeds: &[u64],
) -> Result<NoiseStability> {
    let params = IndicatorParams {
        normalize: true,
        ..*params
    };
    let sol = cfg.solve(scene)?;
    let clean = cfg.cauchy(&sol)?;
    let reference = normalize(&indicator_nearfield(&clean, &cfg.grid, &params)?);
    let correlations = seeds
        .iter()
        .map(|&seed| {
            deltas
                .iter()
                .map(|&delta| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let noisy = add_noise(&clean, delta, &mut rng)?;
                    let img = indicator_nearfield(&noisy, &cfg.grid, &params)?;
                    Ok(pearson(&reference.values, &img.values))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = (0..deltas.len())
        .map(|i| correlations.iter().map(|c| c[i]).sum::<f64>() / seeds.len().max(1) as f64)
        .collect();
    Ok(NoiseStability {
        deltas: deltas.to_vec(),
        correlations,
        mean,
    })
}

/// Circle size for decay runs: spacing at `R = 100` stays under half a
/// wavelength at `k = 6`.
pub const DECAY_BOUNDARY_POINTS: usize = 2048;

/// The paper's noise levels.
pub const NOISE_LEVELS: [f64; 4] = [0.05, 0.07, 0.10, 0.15];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_flag() {
        let d = |e: f64| Diagnostic {
            label: String::new(),
            computed: 0.0,
            reference: 0.0,
            error: e,
        };
        assert!(CheckReport::new("a", "relative", 0.1, vec![d(0.05), d(0.1)]).pass);
        assert!(!CheckReport::new("a", "relative", 0.1, vec![d(0.05), d(0.11)]).pass);
        assert!(!CheckReport::new("a", "relative", 0.1, vec![d(f64::NAN)]).pass);
    }

    #[test]
    fn funk_hecke_examples() {
        let r = check_funk_hecke(6.0, [0.0, 0.0], 256, 1e-8).unwrap();
        assert!(r.pass);
        assert!((r.diagnostics[0].computed - TAU).abs() < 1e-12);
        let r = check_funk_hecke(6.0, [0.6, 0.8], 256, 1e-8).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!(r.diagnostics[1].error < 1e-10);
        for kx in [1.0, 5.0, 10.0, 15.0, 20.0] {
            assert!(check_funk_hecke(1.0, [kx, 0.0], 256, 1e-8).unwrap().pass);
        }
    }

    #[test]
    fn helmholtz_examples() {
        let r = check_helmholtz_representation(6.0, 2.0, 512, [0.0, 0.0], FRAC_PI_2, 1e-6).unwrap();
        assert!(r.pass, "{}", r.summary());
        let r =
            check_helmholtz_representation(6.0, 2.0, 512, [0.3, -0.2], FRAC_PI_2, 1e-6).unwrap();
        assert!(r.pass, "{}", r.summary());
        let e1 = check_helmholtz_representation(6.0, 2.0, 24, [0.5, 0.5], 0.3, 1.0)
            .unwrap()
            .max_error;
        let e2 = check_helmholtz_representation(6.0, 2.0, 48, [0.5, 0.5], 0.3, 1.0)
            .unwrap()
            .max_error;
        assert!(e2 * 4.0 <= e1, "{e1} {e2}");
    }

    #[test]
    fn decay_fit_power_law() {
        let d: Vec<f64> = (0..300).map(|i| 5.0 + 45.0 * i as f64 / 299.0).collect();
        let v: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
        let fit = decay_fit(&d, &v).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-10);

        // Oscillating profile with a d^-1 envelope.
        let v: Vec<f64> = d.iter().map(|x| (3.0 * x).cos().powi(2) / x).collect();
        let fit = decay_fit(&d, &v).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.02, "{}", fit.slope);

        let few: Vec<f64> = d.iter().take(10).map(|x| (x * 20.0).sin().abs()).collect();
        assert!(matches!(
            decay_fit(&d[..10], &few),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn specfun_reports_pass() {
        for r in check_specfun(800).unwrap() {
            assert!(r.pass, "{}", r.summary());
        }
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a) - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0; 3], &[1.0; 3]), 1.0);
    }
}
