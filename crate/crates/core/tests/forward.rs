use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use osm_core::forward::{
    far_field, ls_solve, mie_disk_reference, scattered_at, scattered_normal_derivative,
    solve_scene, uniform_directions, ContrastGrid, ContrastSampling, ForwardConfig, GridGeometry,
    MeasurementCurve, MieDisk,
};
use osm_core::scene::{sample_contrast, ContrastScene, ShapePrimitive};

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn disk_scene(eta: f64) -> ContrastScene {
    ContrastScene::default()
        .with_shape(
            ShapePrimitive::disk([0.0, 0.0], 1.0).unwrap(),
            Complex64::new(eta, 0.0),
        )
        .unwrap()
}

fn mie_error(n: usize) -> f64 {
    let scene = disk_scene(1.0);
    let sol = solve_scene(&scene, 6.0, FRAC_PI_2, &ForwardConfig::with_n(n)).unwrap();
    let curve = MeasurementCurve::circle(100.0, 32).unwrap();
    let us = scattered_at(&sol.total, &sol.grid, curve.points()).unwrap();
    let reference = mie_disk_reference(6.0, 1.0, 1.0, FRAC_PI_2, curve.points()).unwrap();
    rel_l2(&us, &reference)
}

#[test]
fn mie_disk_agreement_and_refinement() {
    let errors: Vec<f64> = [128, 256, 512].iter().map(|&n| mie_error(n)).collect();
    println!("Mie relative L2 errors at N = 128, 256, 512: {errors:?}");
    assert!(errors[1] <= 1e-3, "N=256 error {}", errors[1]);
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

#[test]
fn zero_contrast_is_fixed_point() {
    let g = GridGeometry::centered(64, 8.0);
    let grid = ContrastGrid::zeros(g).unwrap();
    let total = ls_solve(&grid, 6.0, 0.3).unwrap();
    assert_eq!(total.iterations, 0);
    let nodes: Vec<[f64; 2]> = (0..g.len()).map(|i| g.node_at(i)).collect();
    let u_in = osm_core::forward::incident_plane_wave(6.0, 0.3, &nodes);
    assert_eq!(total.u, u_in);
    let curve = MeasurementCurve::circle(100.0, 8).unwrap();
    assert!(scattered_at(&total, &grid, curve.points())
        .unwrap()
        .iter()
        .all(|v| v.norm() == 0.0));
    assert!(scattered_normal_derivative(&total, &grid, &curve)
        .unwrap()
        .iter()
        .all(|v| v.norm() == 0.0));
    let ff = far_field(&total, &grid, &uniform_directions(8)).unwrap();
    assert!(ff.is_zero());
}

#[test]
fn born_limit() {
    // eta = 1e-3: the solution agrees with the first Born term, evaluated by an
    // independent polar quadrature over the disk.
    let (k, eta, theta) = (6.0, 1e-3, FRAC_PI_2);
    let sol = solve_scene(&disk_scene(eta), k, theta, &ForwardConfig::default()).unwrap();
    let curve = MeasurementCurve::circle(100.0, 32).unwrap();
    let us = scattered_at(&sol.total, &sol.grid, curve.points()).unwrap();

    let (nr, nt) = (200, 256);
    let born: Vec<Complex64> = curve
        .points()
        .iter()
        .map(|x| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..nr {
                // Midpoint rule in r, periodic rule in angle.
                let r = (i as f64 + 0.5) / nr as f64;
                for j in 0..nt {
                    let t = std::f64::consts::TAU * j as f64 / nt as f64;
                    let y = [r * t.cos(), r * t.sin()];
                    let u_in = Complex64::from_polar(1.0, k * y[1]);
                    let g = osm_core::forward::green2d(k, *x, y).unwrap();
                    s += g * u_in * r;
                }
            }
            s * k * k * eta * (1.0 / nr as f64) * (std::f64::consts::TAU / nt as f64)
        })
        .collect();
    let err = rel_l2(&us, &born);
    println!("Born relative L2 discrepancy: {err:.3e}");
    assert!(err <= 5e-3);
}

#[test]
fn radiation_condition_and_far_field_consistency() {
    let k = 6.0;
    let sol = solve_scene(&disk_scene(1.0), k, FRAC_PI_2, &ForwardConfig::default()).unwrap();
    let curve = MeasurementCurve::circle(100.0, 32).unwrap();
    let us = scattered_at(&sol.total, &sol.grid, curve.points()).unwrap();
    let dus = scattered_normal_derivative(&sol.total, &sol.grid, &curve).unwrap();
    let ik_us: Vec<Complex64> = us.iter().map(|v| v * Complex64::new(0.0, k)).collect();
    let rad = rel_l2(&dus, &ik_us);
    println!("radiation check at R=100: {rad:.3e}");
    assert!(rad <= 0.02);

    let dirs = uniform_directions(32);
    let ff = far_field(&sol.total, &sol.grid, &dirs).unwrap();
    let mie_ff = MieDisk::new(k, 1.0, 1.0)
        .unwrap()
        .far_field(FRAC_PI_2, &dirs);
    let ff_err = rel_l2(&ff.values, &mie_ff.values);
    println!("far field vs Mie: {ff_err:.3e}");
    assert!(ff_err <= 1e-3);

    let discrepancy = |r: f64| {
        let pts: Vec<[f64; 2]> = dirs.iter().map(|d| [r * d[0], r * d[1]]).collect();
        let near = scattered_at(&sol.total, &sol.grid, &pts).unwrap();
        let scaled: Vec<Complex64> = near
            .iter()
            .map(|u| u * r.sqrt() * Complex64::from_polar(1.0, -k * r))
            .collect();
        rel_l2(&scaled, &ff.values)
    };
    let (d100, d400) = (discrepancy(100.0), discrepancy(400.0));
    println!("asymptotic discrepancy R=100 {d100:.3e}, R=400 {d400:.3e}");
    assert!(d400 * 3.0 <= d100);
}

#[test]
fn normal_derivative_matches_radial_differences() {
    let sol = solve_scene(&disk_scene(0.5), 6.0, 0.7, &ForwardConfig::with_n(128)).unwrap();
    let curve = MeasurementCurve::circle(3.0, 12).unwrap();
    let dus = scattered_normal_derivative(&sol.total, &sol.grid, &curve).unwrap();
    let h = 1e-4;
    let shift = |s: f64| -> Vec<[f64; 2]> {
        curve
            .points()
            .iter()
            .zip(curve.normals())
            .map(|(p, n)| [p[0] + s * n[0], p[1] + s * n[1]])
            .collect()
    };
    let up = scattered_at(&sol.total, &sol.grid, &shift(h)).unwrap();
    let down = scattered_at(&sol.total, &sol.grid, &shift(-h)).unwrap();
    let fd: Vec<Complex64> = up
        .iter()
        .zip(&down)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    assert!(rel_l2(&fd, &dus) <= 1e-5);
}

#[test]
fn translation_covariance() {
    // Shift by a whole number of cells so the sampled contrast moves rigidly.
    let cfg = ForwardConfig::with_n(128);
    let (k, theta) = (6.0, 0.4);
    let base = ContrastScene::default()
        .with_shape(
            ShapePrimitive::ellipse([-0.2, 0.1], [0.6, 0.3], 0.5).unwrap(),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
    let h = cfg.geometry(&base).h;
    let t = [8.0 * h, -4.0 * h];
    let moved = base.translated(t);
    let a = solve_scene(&base, k, theta, &cfg).unwrap();
    let b = solve_scene(&moved, k, theta, &cfg).unwrap();
    let curve = MeasurementCurve::circle(50.0, 16).unwrap();
    let pts_b: Vec<[f64; 2]> = curve
        .points()
        .iter()
        .map(|p| [p[0] + t[0], p[1] + t[1]])
        .collect();
    let ua = scattered_at(&a.total, &a.grid, curve.points()).unwrap();
    let ub = scattered_at(&b.total, &b.grid, &pts_b).unwrap();
    let phase = Complex64::from_polar(1.0, k * (t[0] * theta.cos() + t[1] * theta.sin()));
    let ua_shifted: Vec<Complex64> = ua.iter().map(|v| v * phase).collect();
    let err = rel_l2(&ub, &ua_shifted);
    assert!(err < 1e-5, "translation mismatch {err}");
}

#[test]
fn accuracy_guard_near_support() {
    let g = GridGeometry::centered(64, 8.0);
    let scene = disk_scene(1.0);
    let grid = sample_contrast(&scene, g).unwrap();
    let total = ls_solve(&grid, 2.0, 0.0).unwrap();
    assert!(scattered_at(&total, &grid, &[[1.0 + 0.5 * g.h, 0.0]]).is_err());
    assert!(scattered_at(&total, &grid, &[[1.0 + 3.0 * g.h, 0.0]]).is_ok());
}

#[test]
fn filtered_sampling_beats_nodes() {
    let scene = disk_scene(1.0);
    let curve = MeasurementCurve::circle(100.0, 32).unwrap();
    let reference = mie_disk_reference(6.0, 1.0, 1.0, 0.0, curve.points()).unwrap();
    let err = |sampling| {
        let cfg = ForwardConfig {
            sampling,
            ..ForwardConfig::with_n(128)
        };
        let sol = solve_scene(&scene, 6.0, 0.0, &cfg).unwrap();
        rel_l2(
            &scattered_at(&sol.total, &sol.grid, curve.points()).unwrap(),
            &reference,
        )
    };
    let nodes = err(ContrastSampling::Nodes);
    let filtered = err(ContrastSampling::Filtered { subsamples: 8 });
    assert!(filtered < nodes / 3.0, "nodes {nodes} filtered {filtered}");
}
