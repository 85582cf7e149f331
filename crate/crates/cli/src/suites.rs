//! Verification suites shared by `osm verify` and the acceptance tests.

use std::f64::consts::FRAC_PI_2;

use clap::ValueEnum;
use osm_core::imaging::IndicatorParams;
use osm_core::oracles::{
    check_decay, check_funk_hecke, check_helmholtz_representation, check_mie, check_specfun,
    check_theorem1, check_theorem2, disk_scene, noise_stability, CheckReport, OracleConfig,
    Theorem2Form, DECAY_BOUNDARY_POINTS, NOISE_LEVELS,
};
use osm_core::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Specfun,
    Forward,
    FunkHecke,
    Helmholtz,
    Theorem1,
    /// `I = gamma |I_OSM|^rho`, as the theorem is stated.
    Theorem2,
    /// `gamma I = |I_OSM|^rho`, as the proof derives it.
    Theorem2Reciprocal,
    Decay,
    Noise,
}

impl Suite {
    pub const DEFAULT: [Suite; 9] = [
        Suite::Specfun,
        Suite::Forward,
        Suite::FunkHecke,
        Suite::Helmholtz,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Theorem2Reciprocal,
        Suite::Decay,
        Suite::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Forward => "forward",
            Suite::FunkHecke => "funk-hecke",
            Suite::Helmholtz => "helmholtz",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Theorem2Reciprocal => "theorem2-reciprocal",
            Suite::Decay => "decay",
            Suite::Noise => "noise",
        }
    }
}

/// Knobs of the verification runs that are not oracle tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    pub oracle: OracleConfig,
    /// Disk contrast of the test scene.
    pub eta: f64,
    pub rhos: Vec<u32>,
    pub mie_sizes: Vec<usize>,
    pub mie_tolerance: f64,
    pub noise_seeds: u64,
    pub decay_directions: Vec<[f64; 2]>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            oracle: OracleConfig::default(),
            eta: 1.0,
            rhos: vec![1, 2],
            mie_sizes: vec![128, 256, 512],
            mie_tolerance: 1e-3,
            noise_seeds: 10,
            decay_directions: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        }
    }
}

fn funk_hecke(cfg: &OracleConfig) -> Result<CheckReport> {
    let k = cfg.k;
    let mut parts = Vec::new();
    for i in 0..=40 {
        let r = 0.5 * i as f64 / k;
        for phi in [0.0f64, 0.7, 2.0] {
            parts.push(check_funk_hecke(
                k,
                [r * phi.cos(), r * phi.sin()],
                256,
                cfg.tolerances.funk_hecke,
            )?);
        }
    }
    Ok(CheckReport::merge("funk-hecke", parts).with_note("k|x| in [0, 20], 256 nodes"))
}

fn helmholtz(cfg: &OracleConfig) -> Result<CheckReport> {
    let mut parts = Vec::new();
    for x in [[0.0, 0.0], [0.3, -0.2], [-1.0, 0.5], [0.9, 0.9]] {
        for theta in [0.0, FRAC_PI_2, 2.5] {
            parts.push(check_helmholtz_representation(
                cfg.k,
                2.0,
                512,
                x,
                theta,
                cfg.tolerances.helmholtz,
            )?);
        }
    }
    Ok(CheckReport::merge("helmholtz-representation", parts).with_note("R = 2, 512 nodes"))
}

pub fn run_suite(suite: Suite, s: &VerifySettings) -> Result<Vec<CheckReport>> {
    let cfg = &s.oracle;
    let scene = disk_scene(1.0, s.eta)?;
    let params = |rho: u32| IndicatorParams::with_rho(rho);
    let per_rho = |f: &dyn Fn(u32) -> Result<CheckReport>| -> Result<Vec<CheckReport>> {
        s.rhos.iter().map(|&rho| f(rho)).collect()
    };
    let name = |r: CheckReport, rho: u32| CheckReport {
        name: format!("{}-rho{rho}", r.name),
        ..r
    };
    match suite {
        Suite::Specfun => check_specfun(4000),
        Suite::Forward => Ok(vec![check_mie(cfg, s.eta, &s.mie_sizes, s.mie_tolerance)?]),
        Suite::FunkHecke => Ok(vec![funk_hecke(cfg)?]),
        Suite::Helmholtz => Ok(vec![helmholtz(cfg)?]),
        Suite::Theorem1 => {
            per_rho(&|rho| Ok(name(check_theorem1(&scene, cfg, &params(rho))?, rho)))
        }
        Suite::Theorem2 | Suite::Theorem2Reciprocal => {
            let form = if suite == Suite::Theorem2 {
                Theorem2Form::AsPrinted
            } else {
                Theorem2Form::Reciprocal
            };
            per_rho(&|rho| {
                Ok(name(
                    check_theorem2(&scene, cfg, &params(rho), cfg.directions, form)?,
                    rho,
                ))
            })
        }
        Suite::Decay => per_rho(&|rho| {
            let parts = s
                .decay_directions
                .iter()
                .map(|d| check_decay(&scene, cfg, &params(rho), *d, DECAY_BOUNDARY_POINTS))
                .collect::<Result<Vec<_>>>()?;
            Ok(CheckReport::merge(&format!("decay-rho{rho}"), parts))
        }),
        Suite::Noise => {
            let seeds: Vec<u64> = (0..s.noise_seeds).collect();
            let st = noise_stability(
                &scene,
                cfg,
                &IndicatorParams::default(),
                &NOISE_LEVELS,
                &seeds,
            )?;
            Ok(st.reports(cfg.tolerances.noise_correlation))
        }
    }
}
