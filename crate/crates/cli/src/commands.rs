use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use osm_core::dataset::{generate, DatasetSpec, ThetaCount};
use osm_core::forward::{
    cauchy_data, solve_scene, CauchyData, CurveDescriptor, ForwardConfig, MeasurementCurve,
    ScatteredData,
};
use osm_core::fresnel::{self, ColumnMap, ParseMode, StandIn};
use osm_core::imaging::{
    indicator_farfield, indicator_nearfield, upsample_bilinear, ImagingResult, IndicatorParams,
    SamplingGrid,
};
use osm_core::pixel::{Extent, PixelImage};
use osm_core::scene::ContrastScene;
use serde::{Deserialize, Serialize};

use crate::suites::{run_suite, Suite, VerifySettings};
use crate::{load_config, prepare_out, usage, write_json, EXIT_CHECK, EXIT_OK};

const RESOLVED: &str = "config.resolved.json";

/// `start:end:step` in degrees.
fn parse_arc(s: &str) -> Result<(f64, f64, f64), String> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected START:END:STEP in degrees".into()),
    }
}

fn arc_descriptor(radius: f64, (a, b, step): (f64, f64, f64)) -> anyhow::Result<CurveDescriptor> {
    Ok(MeasurementCurve::arc_uniform(radius, a, b, step)?
        .descriptor()
        .clone())
}

fn curve_radius(c: &CurveDescriptor) -> f64 {
    match c {
        CurveDescriptor::Circle { radius, .. } | CurveDescriptor::Arc { radius, .. } => *radius,
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Scene JSON file (shapes and contrasts, lengths in scene units).
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    /// Wave number [1/length unit]. Default 6.
    #[arg(long, value_name = "1/LENGTH")]
    pub k: Option<f64>,
    /// Incident direction [degrees from the +x axis]. Default 90.
    #[arg(long, value_name = "DEG")]
    pub theta_deg: Option<f64>,
    /// Measurement circle radius [length units]. Default 100.
    #[arg(long, value_name = "LENGTH")]
    pub radius: Option<f64>,
    /// Number of equispaced points on the full circle. Default 32.
    #[arg(long, value_name = "COUNT")]
    pub count: Option<usize>,
    /// Measure on an arc instead, START:END:STEP [degrees].
    #[arg(long, value_name = "DEG:DEG:DEG", value_parser = parse_arc)]
    pub arc: Option<(f64, f64, f64)>,
    /// Solver grid points per side of the periodization cell. Default 256.
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub scene: Option<PathBuf>,
    pub k: f64,
    pub theta_deg: f64,
    pub curve: CurveDescriptor,
    pub forward: ForwardConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            scene: None,
            k: 6.0,
            theta_deg: 90.0,
            curve: CurveDescriptor::Circle {
                radius: 100.0,
                count: 32,
            },
            forward: ForwardConfig::default(),
        }
    }
}

#[derive(Serialize)]
struct SolveInfo {
    iterations: usize,
    residual: f64,
    support_nodes: usize,
}

pub fn simulate(a: &SimulateArgs) -> anyhow::Result<i32> {
    let mut c: SimulateConfig = load_config(a.config.as_deref())?;
    if a.scene.is_some() {
        c.scene = a.scene.clone();
    }
    c.k = a.k.unwrap_or(c.k);
    c.theta_deg = a.theta_deg.unwrap_or(c.theta_deg);
    if let Some(n) = a.n {
        c.forward.n = n;
    }
    if let Some(arc) = a.arc {
        c.curve = arc_descriptor(a.radius.unwrap_or(curve_radius(&c.curve)), arc)?;
    } else if a.radius.is_some() || a.count.is_some() {
        let count = match &c.curve {
            CurveDescriptor::Circle { count, .. } => *count,
            CurveDescriptor::Arc { angles_deg, .. } => angles_deg.len(),
        };
        c.curve = CurveDescriptor::Circle {
            radius: a.radius.unwrap_or(curve_radius(&c.curve)),
            count: a.count.unwrap_or(count),
        };
    }
    let scene_path = c
        .scene
        .clone()
        .ok_or_else(|| usage("a scene file is required (--scene or config)"))?;
    let out = prepare_out(&a.out)?;
    write_json(&out.join(RESOLVED), &c)?;

    let scene = ContrastScene::read(&scene_path)?;
    if scene.is_contrast_free() {
        eprintln!("warning: scene has no contrast; the scattered data are zero");
    }
    let curve = MeasurementCurve::from_descriptor(c.curve.clone())?;
    let sol = solve_scene(&scene, c.k, c.theta_deg.to_radians(), &c.forward)?;
    let data = cauchy_data(&sol.total, &sol.grid, &curve)?;
    data.write(&out.join("cauchy.json"))?;
    write_json(
        &out.join("solve.json"),
        &SolveInfo {
            iterations: sol.total.iterations,
            residual: sol.total.residual,
            support_nodes: sol.grid.support().len(),
        },
    )?;
    eprintln!(
        "solved in {} GMRES iterations; wrote {}",
        sol.total.iterations,
        out.join("cauchy.json").display()
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Cauchy data (field and normal derivative).
    NearField,
    /// Scattered field only, derivative replaced by `ik u`.
    FarField,
}

#[derive(Debug, Clone, Args)]
pub struct ImageArgs {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Data header written by `simulate` (JSON with a `.bin` sibling).
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Indicator variant. Default near-field.
    #[arg(long, value_enum)]
    pub indicator: Option<Variant>,
    /// Exponent of the indicator, 1 or 2. Default 2.
    #[arg(long, value_name = "RHO", value_parser = clap::value_parser!(u32).range(1..=2))]
    pub rho: Option<u32>,
    /// Sampling points per side. Default 64.
    #[arg(long, value_name = "N")]
    pub grid_n: Option<usize>,
    /// Half-width of the square sampling domain centered at the origin [length units]. Default 2.
    #[arg(long, value_name = "LENGTH")]
    pub half_width: Option<f64>,
    /// Side of the upsampled preview image [pixels]. Default 160.
    #[arg(long, value_name = "PIXELS")]
    pub size: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImageConfig {
    pub data: Option<PathBuf>,
    pub indicator: Variant,
    pub params: IndicatorParams,
    pub grid: SamplingGrid,
    pub size: usize,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig {
            data: None,
            indicator: Variant::NearField,
            params: IndicatorParams::default(),
            grid: SamplingGrid::default(),
            size: 160,
        }
    }
}

fn write_images(
    out: &Path,
    stem: &str,
    img: &ImagingResult,
    up: &PixelImage,
) -> anyhow::Result<()> {
    img.write(&out.join(format!("{stem}.osmi")))?;
    img.to_pixel_image()?
        .write_png(&out.join(format!("{stem}.png")))?;
    up.write_osmi(&out.join("prelim.osmi"))?;
    up.write_png(&out.join("prelim.png"))?;
    if img.degenerate {
        eprintln!("warning: the data are zero; the image is flagged degenerate");
    }
    Ok(())
}

pub fn image(a: &ImageArgs) -> anyhow::Result<i32> {
    let mut c: ImageConfig = load_config(a.config.as_deref())?;
    if a.data.is_some() {
        c.data = a.data.clone();
    }
    c.indicator = a.indicator.unwrap_or(c.indicator);
    c.params.rho = a.rho.unwrap_or(c.params.rho);
    c.params.normalize = true;
    c.grid.n = a.grid_n.unwrap_or(c.grid.n);
    if let Some(h) = a.half_width {
        c.grid.extent = Extent::square([0.0, 0.0], h);
    }
    c.size = a.size.unwrap_or(c.size);
    c.params.validate().map_err(|e| usage(e.to_string()))?;
    let data_path = c
        .data
        .clone()
        .ok_or_else(|| usage("a data file is required (--data or config)"))?;
    let out = prepare_out(&a.out)?;
    write_json(&out.join(RESOLVED), &c)?;

    let img = match c.indicator {
        Variant::NearField => {
            indicator_nearfield(&CauchyData::read(&data_path)?, &c.grid, &c.params)?
        }
        Variant::FarField => {
            indicator_farfield(&ScatteredData::read(&data_path)?, &c.grid, &c.params)?
        }
    };
    let up = upsample_bilinear(&img, c.size)?;
    write_images(&out, "indicator", &img, &up)?;
    eprintln!("wrote {}", out.join("indicator.osmi").display());
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// JSON file with verification settings (oracle config, tolerances, seeds).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Suite to run; repeat for several. Default: all.
    #[arg(long, value_enum)]
    pub suite: Vec<Suite>,
    /// Number of noise seeds for the noise suite.
    #[arg(long, value_name = "COUNT")]
    pub seeds: Option<u64>,
    /// Output directory for `reports.json`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct VerifyResolved<'a> {
    suites: Vec<&'static str>,
    settings: &'a VerifySettings,
}

pub fn verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let mut s: VerifySettings = load_config(a.config.as_deref())?;
    s.noise_seeds = a.seeds.unwrap_or(s.noise_seeds);
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::DEFAULT.to_vec()
    } else {
        a.suite.clone()
    };
    let out = prepare_out(&a.out)?;
    write_json(
        &out.join(RESOLVED),
        &VerifyResolved {
            suites: suites.iter().map(|s| s.name()).collect(),
            settings: &s,
        },
    )?;
    let mut reports = Vec::new();
    for suite in suites {
        let t = Instant::now();
        let rs = run_suite(suite, &s).with_context(|| format!("suite {}", suite.name()))?;
        for r in &rs {
            println!("{}", r.summary());
        }
        eprintln!(
            "suite {} took {:.1} s",
            suite.name(),
            t.elapsed().as_secs_f64()
        );
        reports.extend(rs);
    }
    write_json(&out.join("reports.json"), &reports)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", reports.len());
        return Ok(EXIT_CHECK);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// Dataset spec JSON (count, angles, k, contrast, noise, curve, sizes, seed).
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Number of pairs, all at the first incident angle of the spec.
    #[arg(long, value_name = "COUNT")]
    pub count: Option<usize>,
    /// Master seed.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Relative noise level on the Cauchy data [fraction, e.g. 0.05].
    #[arg(long, value_name = "FRACTION")]
    pub noise: Option<f64>,
    /// Solver grid points per side.
    #[arg(long, value_name = "N")]
    pub solver_n: Option<usize>,
    /// Output directory (overrides the spec).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn dataset(a: &DatasetArgs) -> anyhow::Result<i32> {
    let mut s: DatasetSpec = load_config(a.spec.as_deref())?;
    if let Some(n) = a.count {
        let theta = s.thetas.first().map_or(90.0, |t| t.theta_deg);
        s.count = n;
        s.thetas = vec![ThetaCount {
            theta_deg: theta,
            count: n,
        }];
    }
    s.seed = a.seed.unwrap_or(s.seed);
    s.noise = a.noise.unwrap_or(s.noise);
    s.solver_n = a.solver_n.unwrap_or(s.solver_n);
    if let Some(o) = &a.out {
        s.output = o.clone();
    }
    s.validate().map_err(|e| usage(e.to_string()))?;
    let out = prepare_out(&s.output)?;
    write_json(&out.join(RESOLVED), &s)?;
    let t = Instant::now();
    let m = generate(&s)?;
    for f in &m.failed {
        eprintln!("warning: sample {} failed: {}", f.id, f.error);
    }
    eprintln!(
        "{} pairs written, {} failed, {:.1} s",
        m.samples.len(),
        m.failed.len(),
        t.elapsed().as_secs_f64()
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct FresnelArgs {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Input `.exp` file (whitespace-separated columns).
    #[arg(long, value_name = "FILE", conflicts_with = "simulate")]
    pub input: Option<PathBuf>,
    /// Use a simulated 15 mm disk at the experimental geometry instead of a file.
    #[arg(long)]
    pub simulate: bool,
    /// Frequency [GHz]. Default 8.
    #[arg(long, value_name = "GHZ")]
    pub frequency_ghz: Option<f64>,
    /// Transmitter angle [degrees]. Default 90.
    #[arg(long, value_name = "DEG")]
    pub transmitter_deg: Option<f64>,
    /// Collect malformed lines instead of failing on the first.
    #[arg(long)]
    pub lenient: bool,
    /// Zero-based columns tx,rx,freq,total_re,total_im,incident_re,incident_im.
    #[arg(
        long,
        value_name = "C,C,C,C,C,C,C",
        value_delimiter = ',',
        num_args = 7
    )]
    pub columns: Option<Vec<usize>>,
    /// Exponent of the indicator, 1 or 2. Default 2.
    #[arg(long, value_name = "RHO", value_parser = clap::value_parser!(u32).range(1..=2))]
    pub rho: Option<u32>,
    /// Sampling points per side. Default 64.
    #[arg(long, value_name = "N")]
    pub grid_n: Option<usize>,
    /// Half-width of the sampling square [length units of 40 mm]. Default 2.
    #[arg(long, value_name = "LENGTH")]
    pub half_width: Option<f64>,
    /// Side of the upsampled image [pixels]. Default 160.
    #[arg(long, value_name = "PIXELS")]
    pub size: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FresnelConfig {
    pub input: Option<PathBuf>,
    pub simulate: bool,
    pub stand_in: StandIn,
    pub frequency_ghz: f64,
    pub transmitter_deg: f64,
    pub mode: ParseMode,
    pub columns: ColumnMap,
    pub params: IndicatorParams,
    pub grid: SamplingGrid,
    pub size: usize,
}

impl Default for FresnelConfig {
    fn default() -> Self {
        FresnelConfig {
            input: None,
            simulate: false,
            stand_in: StandIn::default(),
            frequency_ghz: 8.0,
            transmitter_deg: 90.0,
            mode: ParseMode::Strict,
            columns: ColumnMap::default(),
            params: IndicatorParams::default(),
            grid: SamplingGrid::default(),
            size: 160,
        }
    }
}

pub fn fresnel(a: &FresnelArgs) -> anyhow::Result<i32> {
    let mut c: FresnelConfig = load_config(a.config.as_deref())?;
    if a.input.is_some() {
        c.input = a.input.clone();
        c.simulate = false;
    }
    c.simulate |= a.simulate;
    c.frequency_ghz = a.frequency_ghz.unwrap_or(c.frequency_ghz);
    c.transmitter_deg = a.transmitter_deg.unwrap_or(c.transmitter_deg);
    if a.lenient {
        c.mode = ParseMode::Lenient;
    }
    if let Some(v) = &a.columns {
        c.columns = ColumnMap {
            transmitter: v[0],
            receiver: v[1],
            frequency: v[2],
            total_re: v[3],
            total_im: v[4],
            incident_re: v[5],
            incident_im: v[6],
        };
    }
    c.params.rho = a.rho.unwrap_or(c.params.rho);
    c.grid.n = a.grid_n.unwrap_or(c.grid.n);
    if let Some(h) = a.half_width {
        c.grid.extent = Extent::square([0.0, 0.0], h);
    }
    c.size = a.size.unwrap_or(c.size);
    c.columns.validate().map_err(|e| usage(e.to_string()))?;
    if c.input.is_none() && !c.simulate {
        return Err(usage("give --input FILE or --simulate"));
    }
    let out = prepare_out(&a.out)?;
    write_json(&out.join(RESOLVED), &c)?;

    let set = if c.simulate {
        let set = fresnel::simulate(&c.stand_in)?;
        let text = set.to_text(&c.columns);
        let p = out.join("stand-in.exp");
        std::fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
        fresnel::parse(&text, &c.columns, c.mode, &p.display().to_string())?
    } else {
        fresnel::parse_file(c.input.as_deref().unwrap(), &c.columns, c.mode)?
    };
    for d in &set.diagnostics {
        eprintln!("warning: line {} skipped: {}", d.line, d.detail);
    }
    if set.ragged {
        eprintln!(
            "warning: record count does not fill the transmitter x receiver x frequency grid"
        );
    }
    let (img, up) = fresnel::image_fresnel(
        &set,
        c.frequency_ghz,
        c.transmitter_deg,
        &c.grid,
        &c.params,
        c.size,
    )?;
    write_images(&out, "fresnel", &img, &up)?;
    let z = img.argmax();
    eprintln!(
        "k = {:.4}, {} receivers, argmax at ({:.3}, {:.3})",
        img.provenance.k,
        fresnel::to_scattered(&set, c.frequency_ghz, c.transmitter_deg)?
            .curve
            .len(),
        z[0],
        z[1]
    );
    Ok(EXIT_OK)
}
