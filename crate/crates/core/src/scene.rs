//! Scatterer geometry: shape primitives, contrast scenes, rasterization and
//! the random ellipse sampler used for training data.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ContrastGrid, ContrastSampling, GridGeometry};
use crate::pixel::{Extent, PixelImage};

pub const SCENE_VERSION: u32 = 1;

/// Waist ratio of the default peanut.
pub const DEFAULT_PEANUT_WAIST: f64 = 0.25;

/// Size parameters per variant, in the shape's local (unrotated) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum ShapeKind {
    Ellipse {
        semi_axes: [f64; 2],
    },
    Rectangle {
        half_widths: [f64; 2],
    },
    Disk {
        radius: f64,
    },
    /// Vertical arm of height `height` along the left edge plus a horizontal
    /// arm of width `width` along the bottom edge, both `thickness` thick.
    LShape {
        width: f64,
        height: f64,
        thickness: f64,
    },
    /// Horizontal bar of `bar_thickness` across the top plus a centered stem.
    TShape {
        width: f64,
        height: f64,
        bar_thickness: f64,
        stem_thickness: f64,
    },
    /// Boundary `r(t) = scale * sqrt(cos^2 t + waist * sin^2 t)`.
    Peanut {
        scale: f64,
        waist: f64,
    },
}

impl ShapeKind {
    pub fn l_shape_default() -> Self {
        ShapeKind::LShape {
            width: 1.5,
            height: 1.5,
            thickness: 0.5,
        }
    }

    pub fn t_shape_default() -> Self {
        ShapeKind::TShape {
            width: 1.5,
            height: 1.5,
            bar_thickness: 0.5,
            stem_thickness: 0.5,
        }
    }

    pub fn peanut_default() -> Self {
        ShapeKind::Peanut {
            scale: 1.0,
            waist: DEFAULT_PEANUT_WAIST,
        }
    }

    fn sizes(&self) -> Vec<f64> {
        match *self {
            ShapeKind::Ellipse { semi_axes } => semi_axes.to_vec(),
            ShapeKind::Rectangle { half_widths } => half_widths.to_vec(),
            ShapeKind::Disk { radius } => vec![radius],
            ShapeKind::LShape {
                width,
                height,
                thickness,
            } => vec![width, height, thickness],
            ShapeKind::TShape {
                width,
                height,
                bar_thickness,
                stem_thickness,
            } => vec![width, height, bar_thickness, stem_thickness],
            ShapeKind::Peanut { scale, waist } => vec![scale, waist],
        }
    }

    fn contains_local(&self, x: f64, y: f64) -> bool {
        match *self {
            ShapeKind::Ellipse { semi_axes: [a, b] } => (x / a).powi(2) + (y / b).powi(2) <= 1.0,
            ShapeKind::Rectangle {
                half_widths: [a, b],
            } => x.abs() <= a && y.abs() <= b,
            ShapeKind::Disk { radius } => x * x + y * y <= radius * radius,
            ShapeKind::LShape {
                width,
                height,
                thickness,
            } => {
                let (hw, hh) = (0.5 * width, 0.5 * height);
                let in_box = x.abs() <= hw && y.abs() <= hh;
                in_box && (x <= -hw + thickness || y <= -hh + thickness)
            }
            ShapeKind::TShape {
                width,
                height,
                bar_thickness,
                stem_thickness,
            } => {
                let (hw, hh) = (0.5 * width, 0.5 * height);
                let in_box = x.abs() <= hw && y.abs() <= hh;
                in_box && (y >= hh - bar_thickness || x.abs() <= 0.5 * stem_thickness)
            }
            ShapeKind::Peanut { scale, waist } => {
                // |p|^2 <= scale^2 (cos^2 t + waist sin^2 t) with cos t = x/|p|
                let r2 = x * x + y * y;
                r2 * r2 <= scale * scale * (x * x + waist * y * y)
            }
        }
    }

    /// Half extents of the local-frame bounding box.
    fn local_half_extent(&self) -> [f64; 2] {
        match *self {
            ShapeKind::Ellipse { semi_axes } => semi_axes,
            ShapeKind::Rectangle { half_widths } => half_widths,
            ShapeKind::Disk { radius } => [radius, radius],
            ShapeKind::LShape { width, height, .. } | ShapeKind::TShape { width, height, .. } => {
                [0.5 * width, 0.5 * height]
            }
            ShapeKind::Peanut { scale, .. } => [scale, scale],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePrimitive {
    #[serde(flatten)]
    pub kind: ShapeKind,
    pub center: [f64; 2],
    /// Radians in `[0, 2 pi)`.
    pub rotation: f64,
}

impl ShapePrimitive {
    pub fn new(kind: ShapeKind, center: [f64; 2], rotation: f64) -> Result<Self> {
        let shape = ShapePrimitive {
            kind,
            center,
            rotation: rotation.rem_euclid(TAU),
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(ShapeKind::Disk { radius }, center, 0.0)
    }

    pub fn ellipse(center: [f64; 2], semi_axes: [f64; 2], rotation: f64) -> Result<Self> {
        Self::new(ShapeKind::Ellipse { semi_axes }, center, rotation)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self
            .kind
            .sizes()
            .iter()
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::Config(format!("shape size {s} must be positive")));
        }
        if let ShapeKind::Peanut { waist, .. } = self.kind {
            if waist >= 1.0 {
                return Err(Error::Config(format!(
                    "peanut waist {waist} must lie in (0, 1)"
                )));
            }
        }
        if !(0.0..TAU).contains(&self.rotation) {
            return Err(Error::Config(format!(
                "rotation {} outside [0, 2pi)",
                self.rotation
            )));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::Config("shape center must be finite".into()));
        }
        Ok(())
    }

    /// Closed-set membership of `p`.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (s, c) = self.rotation.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        // Inverse rotation into the local frame.
        let x = c * dx + s * dy;
        let y = -s * dx + c * dy;
        self.kind.contains_local(x, y)
    }

    pub fn bounding_box(&self) -> Extent {
        let (s, c) = self.rotation.sin_cos();
        let half = match self.kind {
            ShapeKind::Ellipse { semi_axes: [a, b] } => [
                ((a * c).powi(2) + (b * s).powi(2)).sqrt(),
                ((a * s).powi(2) + (b * c).powi(2)).sqrt(),
            ],
            ShapeKind::Disk { radius } => [radius, radius],
            _ => {
                let [a, b] = self.kind.local_half_extent();
                [a * c.abs() + b * s.abs(), a * s.abs() + b * c.abs()]
            }
        };
        Extent {
            min: [self.center[0] - half[0], self.center[1] - half[1]],
            max: [self.center[0] + half[0], self.center[1] + half[1]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Contrast {
    fn from(c: Complex64) -> Self {
        Contrast { re: c.re, im: c.im }
    }
}

impl From<Contrast> for Complex64 {
    fn from(c: Contrast) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneShape {
    #[serde(flatten)]
    pub shape: ShapePrimitive,
    pub contrast: Contrast,
}

/// Union of shapes with piecewise-constant contrast. Where shapes overlap the
/// contrast of the last listed shape applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastScene {
    pub version: u32,
    pub domain: Extent,
    pub shapes: Vec<SceneShape>,
}

impl Default for ContrastScene {
    fn default() -> Self {
        ContrastScene::empty(Extent::default_domain())
    }
}

impl ContrastScene {
    pub fn empty(domain: Extent) -> Self {
        ContrastScene {
            version: SCENE_VERSION,
            domain,
            shapes: Vec::new(),
        }
    }

    pub fn with_shape(mut self, shape: ShapePrimitive, eta: Complex64) -> Result<Self> {
        self.push(shape, eta)?;
        Ok(self)
    }

    pub fn push(&mut self, shape: ShapePrimitive, eta: Complex64) -> Result<()> {
        self.shapes.push(SceneShape {
            shape,
            contrast: eta.into(),
        });
        if let Err(e) = self.validate() {
            self.shapes.pop();
            return Err(e);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENE_VERSION {
            return Err(Error::Config(format!(
                "scene version {} unsupported (expected {SCENE_VERSION})",
                self.version
            )));
        }
        if !self.domain.is_nonempty() || !self.domain.is_square() {
            return Err(Error::Config(
                "scene domain must be a nonempty square".into(),
            ));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            s.shape.validate()?;
            if !(s.contrast.re >= 0.0) || !s.contrast.im.is_finite() {
                return Err(Error::Config(format!(
                    "shape {i}: contrast needs Re >= 0 and finite Im, got {} + {}i",
                    s.contrast.re, s.contrast.im
                )));
            }
            if !self.domain.contains_extent(&s.shape.bounding_box()) {
                return Err(Error::Geometry(format!(
                    "shape {i} extends outside the scene domain"
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// True when no shape carries a nonzero contrast.
    pub fn is_contrast_free(&self) -> bool {
        self.shapes
            .iter()
            .all(|s| s.contrast.re == 0.0 && s.contrast.im == 0.0)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.shapes.iter().any(|s| s.shape.contains(p))
    }

    /// Contrast at `p`; last listed shape wins.
    pub fn eta_at(&self, p: [f64; 2]) -> Complex64 {
        self.shapes
            .iter()
            .rev()
            .find(|s| s.shape.contains(p))
            .map(|s| s.contrast.into())
            .unwrap_or_default()
    }

    /// Union of the shape bounding boxes, `None` for an empty scene.
    pub fn bounding_box(&self) -> Option<Extent> {
        self.shapes
            .iter()
            .map(|s| s.shape.bounding_box())
            .reduce(|a, b| a.union(&b))
    }

    pub fn translated(&self, t: [f64; 2]) -> Self {
        let mut out = self.clone();
        out.domain.min = [out.domain.min[0] + t[0], out.domain.min[1] + t[1]];
        out.domain.max = [out.domain.max[0] + t[0], out.domain.max[1] + t[1]];
        for s in &mut out.shapes {
            s.shape.center = [s.shape.center[0] + t[0], s.shape.center[1] + t[1]];
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scene: ContrastScene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Binary mask sampled at pixel centers of the scene domain.
pub fn rasterize(scene: &ContrastScene, resolution: usize) -> Result<PixelImage> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "raster resolution {resolution} must be at least 2"
        )));
    }
    let mut img = PixelImage::zeros(resolution, resolution, scene.domain);
    let mut values = vec![0.0f32; resolution * resolution];
    for row in 0..resolution {
        for col in 0..resolution {
            if scene.contains(img.pixel_center(row, col)) {
                values[row * resolution + col] = 1.0;
            }
        }
    }
    img = PixelImage::from_parts_unchecked(resolution, resolution, values, img.extent());
    Ok(img)
}

/// Contrast at the grid nodes (closed-set membership, last shape wins).
pub fn sample_contrast(scene: &ContrastScene, geometry: GridGeometry) -> Result<ContrastGrid> {
    sample_contrast_with(scene, geometry, ContrastSampling::Nodes)
}

/// Contrast on the solver grid using the requested sampling rule.
///
/// `Filtered` replaces the node value by `(4 A_h - A_2h) / 3`, where `A_w` is
/// the mean of the contrast over the `w x w` box centered at the node, each
/// box estimated from a regular sub-lattice. The combination has a vanishing
/// second moment, which removes the leading `h^2` bias that plain cell
/// averaging introduces at material interfaces.
pub fn sample_contrast_with(
    scene: &ContrastScene,
    geometry: GridGeometry,
    sampling: ContrastSampling,
) -> Result<ContrastGrid> {
    geometry.validate()?;
    let n = geometry.n;
    let last = geometry.origin[0] + (n - 1) as f64 * geometry.h;
    let last_y = geometry.origin[1] + (n - 1) as f64 * geometry.h;
    let covered = Extent {
        min: geometry.origin,
        max: [last, last_y],
    };
    if !covered.contains_extent(&scene.domain) {
        return Err(Error::Geometry(format!(
            "solver grid {:?}..{:?} does not cover scene domain {:?}..{:?}",
            covered.min, covered.max, scene.domain.min, scene.domain.max
        )));
    }
    let mut eta = vec![Complex64::new(0.0, 0.0); n * n];
    if let Some(bbox) = scene.bounding_box() {
        let h = geometry.h;
        let pad = match sampling {
            ContrastSampling::Nodes => 0.0,
            ContrastSampling::Filtered { .. } => 1.5 * h,
        };
        let index_range = |lo: f64, hi: f64, o: f64| {
            let a = (((lo - pad - o) / h).floor().max(0.0)) as usize;
            let b = ((((hi + pad - o) / h).ceil()) as usize).min(n - 1);
            a..=b
        };
        let xs = index_range(bbox.min[0], bbox.max[0], geometry.origin[0]);
        let ys = index_range(bbox.min[1], bbox.max[1], geometry.origin[1]);
        match sampling {
            ContrastSampling::Nodes => {
                for iy in ys {
                    for ix in xs.clone() {
                        eta[iy * n + ix] = scene.eta_at(geometry.node(ix, iy));
                    }
                }
            }
            ContrastSampling::Filtered { subsamples } => {
                if subsamples < 2 || subsamples % 2 != 0 {
                    return Err(Error::Config(format!(
                        "filtered sampling needs an even subsample count >= 2, got {subsamples}"
                    )));
                }
                let s = subsamples as i64;
                let step = h / subsamples as f64;
                let inner = (s * s) as f64;
                let outer = (4 * s * s) as f64;
                for iy in ys {
                    for ix in xs.clone() {
                        let [cx, cy] = geometry.node(ix, iy);
                        let mut sum_h = Complex64::new(0.0, 0.0);
                        let mut sum_2h = Complex64::new(0.0, 0.0);
                        // Sub-lattice offsets (m + 1/2) step for m in [-s, s).
                        for my in -s..s {
                            let py = cy + (my as f64 + 0.5) * step;
                            let inner_y = (-s / 2..s / 2).contains(&my);
                            for mx in -s..s {
                                let px = cx + (mx as f64 + 0.5) * step;
                                let v = scene.eta_at([px, py]);
                                if v.re == 0.0 && v.im == 0.0 {
                                    continue;
                                }
                                sum_2h += v;
                                if inner_y && (-s / 2..s / 2).contains(&mx) {
                                    sum_h += v;
                                }
                            }
                        }
                        eta[iy * n + ix] = (4.0 * sum_h / inner - sum_2h / outer) / 3.0;
                    }
                }
            }
        }
    }
    ContrastGrid::new(geometry, eta)
}

/// Scene families of the random training sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneFamily {
    OneEllipse,
    TwoEllipse,
}

/// Distribution of the contrast value assigned to each random shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ContrastLaw {
    Constant { re: f64, im: f64 },
    Uniform { min: f64, max: f64 },
}

impl Default for ContrastLaw {
    fn default() -> Self {
        ContrastLaw::Constant { re: 1.0, im: 0.0 }
    }
}

impl ContrastLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ContrastLaw::Constant { re, im } if re >= 0.0 && im.is_finite() => Ok(()),
            ContrastLaw::Uniform { min, max } if min >= 0.0 && max >= min && max.is_finite() => {
                Ok(())
            }
            other => Err(Error::Config(format!("invalid contrast law {other:?}"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            ContrastLaw::Constant { re, im } => Complex64::new(re, im),
            ContrastLaw::Uniform { min, max } if max > min => {
                Complex64::new(rng.random_range(min..max), 0.0)
            }
            ContrastLaw::Uniform { min, .. } => Complex64::new(min, 0.0),
        }
    }
}

fn random_ellipse<R: Rng + ?Sized>(
    rng: &mut R,
    center_half_width: f64,
    axis_range: (f64, f64),
) -> ShapePrimitive {
    let c = center_half_width;
    let center = [rng.random_range(-c..=c), rng.random_range(-c..=c)];
    let semi_axes = [
        rng.random_range(axis_range.0..=axis_range.1),
        rng.random_range(axis_range.0..=axis_range.1),
    ];
    let rotation = rng.random_range(0.0..TAU);
    ShapePrimitive {
        kind: ShapeKind::Ellipse { semi_axes },
        center,
        rotation,
    }
}

/// Random one- or two-ellipse scene on `[-2, 2]^2`.
///
/// The first ellipse has its center in `[-0.8, 0.8]^2` and semi-axes in
/// `[0.1, 1]`; a second ellipse, when present, has its center in `[-1, 1]^2`
/// and semi-axes in `[0.1, 0.5]`. Overlaps are allowed.
pub fn random_scene<R: Rng + ?Sized>(
    rng: &mut R,
    family: SceneFamily,
    contrast: &ContrastLaw,
) -> ContrastScene {
    let mut scene = ContrastScene::default();
    let first = random_ellipse(rng, 0.8, (0.1, 1.0));
    let eta = contrast.sample(rng);
    scene.shapes.push(SceneShape {
        shape: first,
        contrast: eta.into(),
    });
    if family == SceneFamily::TwoEllipse {
        let second = random_ellipse(rng, 1.0, (0.1, 0.5));
        let eta = contrast.sample(rng);
        scene.shapes.push(SceneShape {
            shape: second,
            contrast: eta.into(),
        });
    }
    scene
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit_disk() -> ShapePrimitive {
        ShapePrimitive::disk([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn disk_membership() {
        assert!(unit_disk().contains([0.0, 0.0]));
        assert!(!unit_disk().contains([3.0, 0.0]));
        assert!(unit_disk().contains([1.0, 0.0]));
    }

    #[test]
    fn rotated_ellipse_membership() {
        let e = ShapePrimitive::ellipse([0.0, 0.0], [1.0, 0.5], FRAC_PI_2).unwrap();
        assert!(e.contains([0.0, 0.9]));
        assert!(!e.contains([0.9, 0.0]));
    }

    #[test]
    fn composite_shapes() {
        let l = ShapePrimitive::new(ShapeKind::l_shape_default(), [0.0, 0.0], 0.0).unwrap();
        assert!(l.contains([-0.6, 0.6]));
        assert!(l.contains([0.6, -0.6]));
        assert!(!l.contains([0.6, 0.6]));
        let t = ShapePrimitive::new(ShapeKind::t_shape_default(), [0.0, 0.0], 0.0).unwrap();
        assert!(t.contains([0.7, 0.7]));
        assert!(t.contains([0.0, -0.7]));
        assert!(!t.contains([0.6, -0.6]));
        let p = ShapePrimitive::new(ShapeKind::peanut_default(), [0.0, 0.0], 0.0).unwrap();
        assert!(p.contains([0.95, 0.0]));
        assert!(p.contains([0.0, 0.45]));
        assert!(!p.contains([0.0, 0.55]));
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(ShapePrimitive::disk([0.0, 0.0], 0.0).is_err());
        assert!(ShapePrimitive::ellipse([0.0, 0.0], [1.0, -1.0], 0.0).is_err());
        let peanut = ShapeKind::Peanut {
            scale: 1.0,
            waist: 1.5,
        };
        assert!(ShapePrimitive::new(peanut, [0.0, 0.0], 0.0).is_err());
        let r = ShapePrimitive::new(ShapeKind::Disk { radius: 1.0 }, [0.0, 0.0], -1.0).unwrap();
        assert!((r.rotation - (TAU - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn scene_validation() {
        let neg = ContrastScene::default().with_shape(unit_disk(), Complex64::new(-0.1, 0.0));
        assert!(neg.is_err());
        let outside = ContrastScene::default().with_shape(
            ShapePrimitive::disk([1.5, 0.0], 1.0).unwrap(),
            Complex64::new(1.0, 0.0),
        );
        assert!(matches!(outside, Err(Error::Geometry(_))));
    }

    #[test]
    fn empty_scene_rasterizes_to_zero() {
        let img = rasterize(&ContrastScene::default(), 160).unwrap();
        assert_eq!(img.count_nonzero(), 0);
        assert!(rasterize(&ContrastScene::default(), 1).is_err());
    }

    #[test]
    fn disk_pixel_count_matches_area() {
        let scene = ContrastScene::default()
            .with_shape(unit_disk(), Complex64::new(1.0, 0.0))
            .unwrap();
        let img = rasterize(&scene, 160).unwrap();
        let expected = PI * 160.0 * 160.0 / 16.0;
        assert!((img.count_nonzero() as f64 - expected).abs() <= 80.0);
    }

    #[test]
    fn union_is_order_free() {
        let a = ShapePrimitive::ellipse([0.3, 0.1], [0.8, 0.4], 0.7).unwrap();
        let b = ShapePrimitive::disk([-0.5, -0.5], 0.6).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let s1 = ContrastScene::default()
            .with_shape(a, one)
            .unwrap()
            .with_shape(b, one)
            .unwrap();
        let s2 = ContrastScene::default()
            .with_shape(b, one)
            .unwrap()
            .with_shape(a, one)
            .unwrap();
        assert_eq!(rasterize(&s1, 160).unwrap(), rasterize(&s2, 160).unwrap());
    }

    #[test]
    fn node_sampling_conventions() {
        let geom = GridGeometry::centered(64, 8.0);
        let empty = sample_contrast(&ContrastScene::default(), geom).unwrap();
        assert!(empty.is_zero());

        let scene = ContrastScene::default()
            .with_shape(unit_disk(), Complex64::new(0.5, 0.0))
            .unwrap();
        let grid = sample_contrast(&scene, geom).unwrap();
        let center = grid.index_of_node([0.0, 0.0]).unwrap();
        assert_eq!(grid.eta()[center], Complex64::new(0.5, 0.0));
        // h = 0.125, so (1, 0) is a node on the boundary circle.
        let boundary = grid.index_of_node([1.0, 0.0]).unwrap();
        assert_eq!(grid.eta()[boundary], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn last_listed_shape_wins_on_overlap() {
        let scene = ContrastScene::default()
            .with_shape(unit_disk(), Complex64::new(0.5, 0.0))
            .unwrap()
            .with_shape(
                ShapePrimitive::disk([0.0, 0.0], 0.5).unwrap(),
                Complex64::new(2.0, 0.0),
            )
            .unwrap();
        assert_eq!(scene.eta_at([0.0, 0.0]), Complex64::new(2.0, 0.0));
        assert_eq!(scene.eta_at([0.75, 0.0]), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn grid_must_cover_domain() {
        let geom = GridGeometry::centered(64, 2.0);
        let err = sample_contrast(&ContrastScene::default(), geom);
        assert!(matches!(err, Err(Error::Geometry(_))));
    }

    #[test]
    fn filtered_sampling_preserves_area_and_interior() {
        let scene = ContrastScene::default()
            .with_shape(unit_disk(), Complex64::new(1.0, 0.0))
            .unwrap();
        let geom = GridGeometry::centered(128, 8.0);
        let grid = sample_contrast_with(&scene, geom, ContrastSampling::Filtered { subsamples: 8 })
            .unwrap();
        let h = geom.h;
        let area: f64 = grid.eta().iter().map(|v| v.re).sum::<f64>() * h * h;
        assert!((area - PI).abs() < 2e-3, "area {area}");
        let center = grid.index_of_node([0.0, 0.0]).unwrap();
        assert!((grid.eta()[center].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_scenes_are_deterministic_and_in_range() {
        let law = ContrastLaw::default();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(
            random_scene(&mut a, SceneFamily::TwoEllipse, &law),
            random_scene(&mut b, SceneFamily::TwoEllipse, &law)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let s = random_scene(&mut rng, SceneFamily::OneEllipse, &law);
            assert_eq!(s.shapes.len(), 1);
            let e = &s.shapes[0].shape;
            assert!(e.center.iter().all(|c| (-0.8..=0.8).contains(c)));
            let ShapeKind::Ellipse { semi_axes } = e.kind else {
                panic!("expected ellipse")
            };
            assert!(semi_axes.iter().all(|a| (0.1..=1.0).contains(a)));
            assert!((0.0..TAU).contains(&e.rotation));
            s.validate().unwrap();
        }
        for _ in 0..1000 {
            let s = random_scene(&mut rng, SceneFamily::TwoEllipse, &law);
            let e = &s.shapes[1].shape;
            assert!(e.center.iter().all(|c| (-1.0..=1.0).contains(c)));
            let ShapeKind::Ellipse { semi_axes } = e.kind else {
                panic!("expected ellipse")
            };
            assert!(semi_axes.iter().all(|a| (0.1..=0.5).contains(a)));
            s.validate().unwrap();
        }
    }

    #[test]
    fn refinement_changes_only_boundary_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..20 {
            let family = if i % 2 == 0 {
                SceneFamily::OneEllipse
            } else {
                SceneFamily::TwoEllipse
            };
            let scene = random_scene(&mut rng, family, &ContrastLaw::default());
            let coarse = rasterize(&scene, 160).unwrap();
            let fine = rasterize(&scene, 320).unwrap();
            let mut differ = 0;
            for r in 0..160 {
                for c in 0..160 {
                    let pooled = (0..2)
                        .flat_map(|dr| (0..2).map(move |dc| (dr, dc)))
                        .map(|(dr, dc)| fine.get(2 * r + dr, 2 * c + dc))
                        .fold(0.0f32, f32::max);
                    if pooled != coarse.get(r, c) {
                        differ += 1;
                    }
                }
            }
            assert!(differ as f64 <= 0.02 * 160.0 * 160.0, "scene {i}: {differ}");
        }
    }

    #[test]
    fn scene_json_round_trip() {
        let scene = ContrastScene::default()
            .with_shape(
                ShapePrimitive::new(ShapeKind::peanut_default(), [0.1, 0.2], 0.3).unwrap(),
                Complex64::new(1.0, 0.25),
            )
            .unwrap();
        let text = scene.to_json().unwrap();
        assert!(text.contains("\"version\": 1"));
        assert!(text.contains("\"variant\": \"peanut\""));
        assert_eq!(ContrastScene::from_json(&text).unwrap(), scene);
    }

    proptest! {
        #[test]
        fn membership_is_rotation_covariant(
            a in 0.1f64..1.0, b in 0.1f64..1.0, rot in 0.0f64..TAU, turn in 0.0f64..TAU,
            px in -1.5f64..1.5, py in -1.5f64..1.5,
        ) {
            let e = ShapePrimitive::ellipse([0.0, 0.0], [a, b], rot).unwrap();
            let turned = ShapePrimitive::ellipse([0.0, 0.0], [a, b], rot + turn).unwrap();
            let (s, c) = turn.sin_cos();
            let q = [c * px - s * py, s * px + c * py];
            // Stay away from the boundary where rounding decides membership.
            let (sr, cr) = rot.sin_cos();
            let lx = cr * px + sr * py;
            let ly = -sr * px + cr * py;
            let level = (lx / a).powi(2) + (ly / b).powi(2);
            prop_assume!((level - 1.0).abs() > 1e-9);
            prop_assert_eq!(e.contains([px, py]), turned.contains(q));
        }

        #[test]
        fn adding_a_shape_never_clears_pixels(
            cx in -1.0f64..1.0, cy in -1.0f64..1.0, r in 0.1f64..0.9,
        ) {
            let one = Complex64::new(1.0, 0.0);
            let base = ContrastScene::default()
                .with_shape(ShapePrimitive::ellipse([0.2, -0.1], [0.7, 0.3], 0.4).unwrap(), one)
                .unwrap();
            let more = base.clone().with_shape(ShapePrimitive::disk([cx, cy], r).unwrap(), one).unwrap();
            let a = rasterize(&base, 64).unwrap();
            let b = rasterize(&more, 64).unwrap();
            prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| y >= x));
        }
    }
}
