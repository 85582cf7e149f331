//! Measurement geometry and the data recorded on it.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel::Extent;

/// How a curve was generated. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveDescriptor {
    /// `count` equispaced points on the full circle, starting at angle 0.
    Circle { radius: f64, count: usize },
    /// Points on a circle at the listed angles, e.g. a receiver aperture.
    Arc { radius: f64, angles_deg: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementCurve {
    descriptor: CurveDescriptor,
    points: Vec<[f64; 2]>,
    normals: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl MeasurementCurve {
    pub fn circle(radius: f64, count: usize) -> Result<Self> {
        Self::from_descriptor(CurveDescriptor::Circle { radius, count })
    }

    /// Arc through the given angles (degrees, strictly increasing). Each point
    /// carries the arc length of its share of the aperture, `R` times half the
    /// gap to each neighbour, with end points mirroring their single gap.
    pub fn arc(radius: f64, angles_deg: Vec<f64>) -> Result<Self> {
        Self::from_descriptor(CurveDescriptor::Arc { radius, angles_deg })
    }

    /// Equispaced arc from `start_deg` to `end_deg` inclusive.
    pub fn arc_uniform(radius: f64, start_deg: f64, end_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || end_deg < start_deg {
            return Err(Error::Config(format!(
                "arc {start_deg}..{end_deg} with step {step_deg} is empty"
            )));
        }
        let count = ((end_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
        let angles = (0..count)
            .map(|i| start_deg + i as f64 * step_deg)
            .collect();
        Self::arc(radius, angles)
    }

    pub fn from_descriptor(descriptor: CurveDescriptor) -> Result<Self> {
        let (radius, angles, weights) = match &descriptor {
            CurveDescriptor::Circle { radius, count } => {
                if *count < 1 {
                    return Err(Error::Config("circle needs at least one point".into()));
                }
                let m = *count as f64;
                let angles: Vec<f64> = (0..*count).map(|j| TAU * j as f64 / m).collect();
                (*radius, angles, vec![TAU * radius / m; *count])
            }
            CurveDescriptor::Arc { radius, angles_deg } => {
                if angles_deg.is_empty() {
                    return Err(Error::Config("arc needs at least one angle".into()));
                }
                if angles_deg.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Config("arc angles must be finite".into()));
                }
                if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(
                        "arc angles must be strictly increasing".into(),
                    ));
                }
                if angles_deg[angles_deg.len() - 1] - angles_deg[0] >= 360.0 {
                    return Err(Error::Config("arc spans a full turn; use a circle".into()));
                }
                let angles: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
                (*radius, angles.clone(), arc_weights(*radius, &angles))
            }
        };
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!(
                "curve radius {radius} must be positive"
            )));
        }
        let normals: Vec<[f64; 2]> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
        let points = normals
            .iter()
            .map(|n| [radius * n[0], radius * n[1]])
            .collect();
        Ok(MeasurementCurve {
            descriptor,
            points,
            normals,
            weights,
        })
    }

    pub fn descriptor(&self) -> &CurveDescriptor {
        &self.descriptor
    }

    pub fn radius(&self) -> f64 {
        match &self.descriptor {
            CurveDescriptor::Circle { radius, .. } | CurveDescriptor::Arc { radius, .. } => *radius,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.descriptor, CurveDescriptor::Circle { .. })
    }

    /// Requires every point to lie strictly outside `bbox`.
    pub fn check_outside(&self, bbox: &Extent) -> Result<()> {
        match self.points.iter().find(|p| {
            p[0] >= bbox.min[0] && p[0] <= bbox.max[0] && p[1] >= bbox.min[1] && p[1] <= bbox.max[1]
        }) {
            Some(p) => Err(Error::Geometry(format!(
                "measurement point ({:.4}, {:.4}) lies inside the scatterer bounding box",
                p[0], p[1]
            ))),
            None => Ok(()),
        }
    }
}

fn arc_weights(radius: f64, angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    if m == 1 {
        return vec![0.0];
    }
    (0..m)
        .map(|j| {
            let left = if j > 0 {
                angles[j] - angles[j - 1]
            } else {
                angles[1] - angles[0]
            };
            let right = if j + 1 < m {
                angles[j + 1] - angles[j]
            } else {
                angles[m - 1] - angles[m - 2]
            };
            radius * 0.5 * (left + right)
        })
        .collect()
}

/// Scattered field and its normal derivative on a measurement curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub curve: MeasurementCurve,
    pub us: Vec<Complex64>,
    pub dus: Vec<Complex64>,
    pub k: f64,
}

/// Scattered field alone, for the derivative-free indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredData {
    pub curve: MeasurementCurve,
    pub us: Vec<Complex64>,
    pub k: f64,
}

impl CauchyData {
    pub fn new(
        curve: MeasurementCurve,
        us: Vec<Complex64>,
        dus: Vec<Complex64>,
        k: f64,
    ) -> Result<Self> {
        let data = CauchyData { curve, us, dus, k };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        if self.us.len() != self.curve.len() || self.dus.len() != self.curve.len() {
            return Err(Error::Config(format!(
                "Cauchy data lengths {}/{} do not match {} curve points",
                self.us.len(),
                self.dus.len(),
                self.curve.len()
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.us
            .iter()
            .chain(&self.dus)
            .all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn scattered_only(&self) -> ScatteredData {
        ScatteredData {
            curve: self.curve.clone(),
            us: self.us.clone(),
            k: self.k,
        }
    }

    pub fn scaled(&self, c: Complex64) -> CauchyData {
        CauchyData {
            curve: self.curve.clone(),
            us: self.us.iter().map(|v| v * c).collect(),
            dus: self.dus.iter().map(|v| v * c).collect(),
            k: self.k,
        }
    }

    /// Writes the JSON header to `path` and the samples to the same path
    /// with extension `bin`.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_pair(path, self.k, &self.curve, &self.us, Some(&self.dus))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (k, curve, us, dus) = read_pair(path)?;
        let dus = dus.ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            detail: "file holds no normal derivative".into(),
        })?;
        CauchyData::new(curve, us, dus, k)
    }
}

impl ScatteredData {
    pub fn new(curve: MeasurementCurve, us: Vec<Complex64>, k: f64) -> Result<Self> {
        check_k(k)?;
        if us.len() != curve.len() {
            return Err(Error::Config(format!(
                "{} scattered values for {} curve points",
                us.len(),
                curve.len()
            )));
        }
        Ok(ScatteredData { curve, us, k })
    }

    pub fn is_zero(&self) -> bool {
        self.us.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_pair(path, self.k, &self.curve, &self.us, None)
    }

    /// Reads either file flavour, dropping the derivative if present.
    pub fn read(path: &Path) -> Result<Self> {
        let (k, curve, us, _) = read_pair(path)?;
        ScatteredData::new(curve, us, k)
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("wave number {k} must be positive")))
    }
}

const FORMAT_TAG: &str = "osm-cauchy";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    k: f64,
    curve: CurveDescriptor,
    count: usize,
    has_dus: bool,
    /// File name of the sample block, relative to the header.
    samples: String,
}

fn samples_path(path: &Path) -> PathBuf {
    path.with_extension("bin")
}

fn write_pair(
    path: &Path,
    k: f64,
    curve: &MeasurementCurve,
    us: &[Complex64],
    dus: Option<&[Complex64]>,
) -> Result<()> {
    let bin = samples_path(path);
    let header = Header {
        format: FORMAT_TAG.into(),
        version: 1,
        k,
        curve: curve.descriptor().clone(),
        count: curve.len(),
        has_dus: dus.is_some(),
        samples: bin
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let mut bytes = Vec::with_capacity(16 * us.len() * 2);
    for v in us.iter().chain(dus.unwrap_or(&[])) {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let mut text = serde_json::to_string_pretty(&header)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

type Pair = (
    f64,
    MeasurementCurve,
    Vec<Complex64>,
    Option<Vec<Complex64>>,
);

fn read_pair(path: &Path) -> Result<Pair> {
    let format_err = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&text)?;
    if header.format != FORMAT_TAG || header.version != 1 {
        return Err(format_err(format!(
            "unsupported data format {} v{}",
            header.format, header.version
        )));
    }
    let curve = MeasurementCurve::from_descriptor(header.curve)?;
    if curve.len() != header.count {
        return Err(format_err(format!(
            "header count {} disagrees with curve ({} points)",
            header.count,
            curve.len()
        )));
    }
    let bin = path.with_file_name(&header.samples);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let blocks = if header.has_dus { 2 } else { 1 };
    if bytes.len() != 16 * header.count * blocks {
        return Err(format_err(format!(
            "sample file has {} bytes, expected {}",
            bytes.len(),
            16 * header.count * blocks
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let (us, dus) = values.split_at(header.count);
    let dus = header.has_dus.then(|| dus.to_vec());
    Ok((header.k, curve, us.to_vec(), dus))
}

/// Far-field pattern on unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub directions: Vec<[f64; 2]>,
    pub values: Vec<Complex64>,
    pub k: f64,
}

/// `m` equispaced unit directions starting at angle 0.
pub fn uniform_directions(m: usize) -> Vec<[f64; 2]> {
    (0..m)
        .map(|j| {
            let a = TAU * j as f64 / m as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

impl FarFieldPattern {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Angular quadrature weights (radians) and whether the directions cover
    /// the circle without a gap wider than 1.5 times the uniform spacing.
    /// Gaps wider than 1.5 times the median spacing count as the median, so
    /// the ends of a partial aperture are not stretched across the hole.
    pub fn angular_weights(&self) -> (Vec<f64>, bool) {
        let m = self.directions.len();
        if m == 0 {
            return (Vec::new(), false);
        }
        if m == 1 {
            return (vec![TAU], false);
        }
        let mut order: Vec<(usize, f64)> = self
            .directions
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d[1].atan2(d[0]).rem_euclid(TAU)))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1));
        let gap = |j: usize| {
            let next = order[(j + 1) % m].1 + if j + 1 == m { TAU } else { 0.0 };
            next - order[j].1
        };
        let gaps: Vec<f64> = (0..m).map(gap).collect();
        let mut sorted = gaps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[m / 2];
        let clip = |g: f64| if g > 1.5 * median { median } else { g };
        let mut weights = vec![0.0; m];
        for j in 0..m {
            weights[order[j].0] = 0.5 * (clip(gaps[(j + m - 1) % m]) + clip(gaps[j]));
        }
        let full = sorted[m - 1] <= 1.5 * TAU / m as f64;
        (weights, full)
    }
}
