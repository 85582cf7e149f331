//! Training-pair factory: random scenes, forward solves, preliminary
//! indicator images and the on-disk layout read by the trainer.
//!
//! ```text
//! <out>/manifest.json
//! <out>/pairs/<id>_true.osmi    binary mask
//! <out>/pairs/<id>_prelim.osmi  normalized, upsampled indicator
//! <out>/pairs/<id>_meta.json
//! <out>/pairs/<id>_{true,prelim}.png  previews (optional)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forward::{
    cauchy_data, solve_scene, CauchyData, CurveDescriptor, ForwardConfig, MeasurementCurve,
};
use crate::imaging::{indicator_nearfield, upsample_bilinear, IndicatorParams, SamplingGrid};
use crate::pixel::{Extent, PixelImage};
use crate::scene::{random_scene, rasterize, ContrastLaw, ContrastScene, SceneFamily};

pub const MANIFEST_VERSION: u32 = 1;
/// 160 px images zoom to 168 px before cropping.
pub const ZOOM_FACTOR: f64 = 1.05;

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn perturb<R: Rng + ?Sized>(v: &[Complex64], delta: f64, rng: &mut R) -> Vec<Complex64> {
    let zeta: Vec<Complex64> = v
        .iter()
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let (nv, nz) = (l2(v), l2(&zeta));
    if delta == 0.0 || nv == 0.0 || nz == 0.0 {
        return v.to_vec();
    }
    let s = delta * nv / nz;
    v.iter().zip(&zeta).map(|(a, z)| a + z * s).collect()
}

/// Adds complex Gaussian noise of relative L2 norm exactly `delta` to `us`
/// and, independently, to `dus`. The draws do not depend on `delta`, so one
/// seed gives the same noise direction at every level.
pub fn add_noise<R: Rng + ?Sized>(
    data: &CauchyData,
    delta: f64,
    rng: &mut R,
) -> Result<CauchyData> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!(
            "noise level {delta} must be a nonnegative fraction"
        )));
    }
    let us = perturb(&data.us, delta, rng);
    let dus = perturb(&data.dus, delta, rng);
    Ok(CauchyData {
        curve: data.curve.clone(),
        us,
        dus,
        k: data.k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentKind {
    Hflip,
    Vflip,
    Rot90,
    Rot270,
    Zoom,
}

impl AugmentKind {
    pub const ALL: [AugmentKind; 5] = [
        AugmentKind::Hflip,
        AugmentKind::Vflip,
        AugmentKind::Rot90,
        AugmentKind::Rot270,
        AugmentKind::Zoom,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub id: String,
    pub scene: ContrastScene,
    pub family: SceneFamily,
    pub theta_deg: f64,
    pub k: f64,
    pub seed: u64,
    pub noise: f64,
    pub degenerate: bool,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub truth: PixelImage,
    pub prelim: PixelImage,
    pub meta: SampleMeta,
}

fn remap(img: &PixelImage, f: impl Fn(usize, usize) -> (usize, usize)) -> PixelImage {
    let n = img.width();
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let (sr, sc) = f(r, c);
            out.push(img.get(sr, sc));
        }
    }
    PixelImage::from_parts_unchecked(n, n, out, img.extent())
}

fn crop(img: &PixelImage, r0: usize, c0: usize, size: usize, extent: Extent) -> PixelImage {
    let mut out = Vec::with_capacity(size * size);
    for r in r0..r0 + size {
        for c in c0..c0 + size {
            out.push(img.get(r, c));
        }
    }
    PixelImage::from_parts_unchecked(size, size, out, extent)
}

/// Applies one transform to both images. Rotations are counterclockwise.
/// Zoom upscales by 5% (160 to 168 px) and crops a random window of the original size
/// at one offset shared by both images; the mask is re-binarized at 1/2.
pub fn augment<R: Rng + ?Sized>(
    pair: &SamplePair,
    kind: AugmentKind,
    rng: &mut R,
) -> Result<SamplePair> {
    let n = pair.truth.width();
    for img in [&pair.truth, &pair.prelim] {
        if img.width() != n || img.height() != n {
            return Err(Error::Config(
                "augmentation needs two square images of one size".into(),
            ));
        }
    }
    let apply = |img: &PixelImage| -> PixelImage {
        match kind {
            AugmentKind::Hflip => remap(img, |r, c| (r, n - 1 - c)),
            AugmentKind::Vflip => remap(img, |r, c| (n - 1 - r, c)),
            AugmentKind::Rot90 => remap(img, |r, c| (c, n - 1 - r)),
            AugmentKind::Rot270 => remap(img, |r, c| (n - 1 - c, r)),
            AugmentKind::Zoom => unreachable!(),
        }
    };
    let (truth, prelim) = if kind == AugmentKind::Zoom {
        let big = ((n as f64 * ZOOM_FACTOR).round() as usize).max(n);
        let (r0, c0) = (rng.random_range(0..=big - n), rng.random_range(0..=big - n));
        let e = pair.truth.extent();
        let (px, py) = (e.width() / big as f64, e.height() / big as f64);
        let sub = Extent {
            min: [e.min[0] + c0 as f64 * px, e.max[1] - (r0 + n) as f64 * py],
            max: [e.min[0] + (c0 + n) as f64 * px, e.max[1] - r0 as f64 * py],
        };
        let t = crop(&pair.truth.resample_bilinear(big, big), r0, c0, n, sub);
        let t = PixelImage::from_parts_unchecked(
            n,
            n,
            t.values()
                .iter()
                .map(|v| if *v >= 0.5 { 1.0 } else { 0.0 })
                .collect(),
            sub,
        );
        let p = crop(&pair.prelim.resample_bilinear(big, big), r0, c0, n, sub);
        (t, p)
    } else {
        (apply(&pair.truth), apply(&pair.prelim))
    };
    Ok(SamplePair {
        truth,
        prelim,
        meta: pair.meta.clone(),
    })
}

/// Number of samples generated at one incident angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaCount {
    pub theta_deg: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub count: usize,
    /// Probability that a sample is a one-ellipse scene; the rest are two-ellipse.
    pub one_ellipse_fraction: f64,
    /// Sample ids are assigned to angles in list order; counts sum to `count`.
    pub thetas: Vec<ThetaCount>,
    pub k: f64,
    pub contrast: ContrastLaw,
    /// Relative noise level on the Cauchy data.
    pub noise: f64,
    pub curve: CurveDescriptor,
    pub solver_n: usize,
    pub image_size: usize,
    pub grid_n: usize,
    pub rho: u32,
    pub seed: u64,
    pub previews: bool,
    pub output: PathBuf,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            count: 4,
            one_ellipse_fraction: 0.5,
            thetas: vec![ThetaCount {
                theta_deg: 90.0,
                count: 4,
            }],
            k: 6.0,
            contrast: ContrastLaw::default(),
            noise: 0.0,
            curve: CurveDescriptor::Circle {
                radius: 100.0,
                count: 32,
            },
            solver_n: 256,
            image_size: 160,
            grid_n: 64,
            rho: 2,
            seed: 0,
            previews: true,
            output: PathBuf::from("dataset"),
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.count < 1 {
            return bad("dataset count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.one_ellipse_fraction) {
            return bad(format!(
                "one-ellipse fraction {} outside [0, 1]",
                self.one_ellipse_fraction
            ));
        }
        let total: usize = self.thetas.iter().map(|t| t.count).sum();
        if total != self.count {
            return bad(format!(
                "per-angle counts sum to {total}, expected {}",
                self.count
            ));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise level {} must be nonnegative", self.noise));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("wave number {} must be positive", self.k));
        }
        if self.image_size < 2 || self.grid_n < 2 {
            return bad("image size and sampling grid need at least 2 pixels".into());
        }
        self.contrast.validate()?;
        IndicatorParams::with_rho(self.rho).validate()?;
        MeasurementCurve::from_descriptor(self.curve.clone())?;
        Ok(())
    }

    pub fn theta_of(&self, index: usize) -> f64 {
        let mut i = index;
        for t in &self.thetas {
            if i < t.count {
                return t.theta_deg;
            }
            i -= t.count;
        }
        self.thetas.last().map_or(90.0, |t| t.theta_deg)
    }

    pub fn forward(&self) -> ForwardConfig {
        ForwardConfig::with_n(self.solver_n)
    }
}

pub fn sample_id(index: usize) -> String {
    format!("{index:06}")
}

/// Per-sample seed: the first eight bytes of `sha256(master || index)`.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((index as u64).to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

/// Builds sample `index` of `spec` in memory.
pub fn build_sample(spec: &DatasetSpec, index: usize) -> Result<SamplePair> {
    let seed = sample_seed(spec.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = if rng.random::<f64>() < spec.one_ellipse_fraction {
        SceneFamily::OneEllipse
    } else {
        SceneFamily::TwoEllipse
    };
    let scene = random_scene(&mut rng, family, &spec.contrast);
    let theta_deg = spec.theta_of(index);
    let sol = solve_scene(&scene, spec.k, theta_deg.to_radians(), &spec.forward())?;
    let curve = MeasurementCurve::from_descriptor(spec.curve.clone())?;
    let clean = cauchy_data(&sol.total, &sol.grid, &curve)?;
    let data = add_noise(&clean, spec.noise, &mut rng)?;
    let grid = SamplingGrid {
        extent: scene.domain,
        n: spec.grid_n,
    };
    let params = IndicatorParams::with_rho(spec.rho);
    let img = indicator_nearfield(&data, &grid, &params)?;
    let prelim = upsample_bilinear(&img, spec.image_size)?;
    let truth = rasterize(&scene, spec.image_size)?;
    Ok(SamplePair {
        truth,
        prelim,
        meta: SampleMeta {
            id: sample_id(index),
            scene,
            family,
            theta_deg,
            k: spec.k,
            seed,
            noise: spec.noise,
            degenerate: img.degenerate,
            solver_iterations: sol.total.iterations,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the dataset root.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub truth: FileEntry,
    pub prelim: FileEntry,
    pub meta: FileEntry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub previews: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedSample {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub spec: DatasetSpec,
    pub samples: Vec<SampleRecord>,
    pub failed: Vec<FailedSample>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn entry(root: &Path, rel: String) -> Result<FileEntry> {
    Ok(FileEntry {
        sha256: sha256_file(&root.join(&rel))?,
        path: rel,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_sample(root: &Path, pair: &SamplePair, previews: bool) -> Result<SampleRecord> {
    let id = &pair.meta.id;
    let rel = |suffix: &str| format!("pairs/{id}_{suffix}");
    pair.truth.write_osmi(&root.join(rel("true.osmi")))?;
    pair.prelim.write_osmi(&root.join(rel("prelim.osmi")))?;
    write_json(&root.join(rel("meta.json")), &pair.meta)?;
    let mut preview_entries = Vec::new();
    if previews {
        pair.truth.write_png(&root.join(rel("true.png")))?;
        pair.prelim.write_png(&root.join(rel("prelim.png")))?;
        preview_entries = vec![
            entry(root, rel("true.png"))?,
            entry(root, rel("prelim.png"))?,
        ];
    }
    Ok(SampleRecord {
        id: id.clone(),
        truth: entry(root, rel("true.osmi"))?,
        prelim: entry(root, rel("prelim.osmi"))?,
        meta: entry(root, rel("meta.json"))?,
        previews: preview_entries,
    })
}

fn is_numerical(e: &Error) -> bool {
    !matches!(e, Error::Io { .. } | Error::Json(_))
}

/// Generates every sample in parallel, then writes `manifest.json` through a
/// temporary file and rename. Samples whose numerics fail are listed under
/// `failed`; I/O errors abort the run.
pub fn generate(spec: &DatasetSpec) -> Result<Manifest> {
    spec.validate()?;
    let root = spec.output.as_path();
    let pairs = root.join("pairs");
    fs::create_dir_all(&pairs).map_err(|e| Error::io(&pairs, e))?;
    let manifest_path = root.join("manifest.json");
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    }
    let outcomes: Vec<Result<std::result::Result<SampleRecord, FailedSample>>> = (0..spec.count)
        .into_par_iter()
        .map(|i| match build_sample(spec, i) {
            Ok(pair) => write_sample(root, &pair, spec.previews).map(Ok),
            Err(e) if is_numerical(&e) => Ok(Err(FailedSample {
                id: sample_id(i),
                error: e.to_string(),
            })),
            Err(e) => Err(e),
        })
        .collect();
    let mut manifest = Manifest {
        version: MANIFEST_VERSION,
        spec: spec.clone(),
        samples: Vec::new(),
        failed: Vec::new(),
    };
    for o in outcomes {
        match o? {
            Ok(r) => manifest.samples.push(r),
            Err(f) => manifest.failed.push(f),
        }
    }
    let tmp = root.join("manifest.json.tmp");
    write_json(&tmp, &manifest)?;
    fs::rename(&tmp, &manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Format {
                path: path.into(),
                detail: format!("unsupported manifest version {}", m.version),
            });
        }
        Ok(m)
    }

    /// Checks that every listed file exists under `root` with its checksum.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for s in &self.samples {
            for f in [&s.truth, &s.prelim, &s.meta]
                .into_iter()
                .chain(&s.previews)
            {
                let p = root.join(&f.path);
                let actual = sha256_file(&p)?;
                if actual != f.sha256 {
                    return Err(Error::Format {
                        path: p,
                        detail: format!("checksum {actual} does not match manifest {}", f.sha256),
                    });
                }
            }
        }
        Ok(())
    }
}
