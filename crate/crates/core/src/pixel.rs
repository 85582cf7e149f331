//! Square-extent raster images and the `OSMI` raw image format.
//!
//! `OSMI` layout, all little-endian:
//!
//! ```text
//! b"OSMI" | u32 version = 1 | u32 width | u32 height | width*height f32, row-major, top row first
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OSMI_MAGIC: &[u8; 4] = b"OSMI";
pub const OSMI_VERSION: u32 = 1;

/// Axis-aligned rectangle in physical (length) units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Extent {
    pub fn square(center: [f64; 2], half_width: f64) -> Self {
        Extent {
            min: [center[0] - half_width, center[1] - half_width],
            max: [center[0] + half_width, center[1] + half_width],
        }
    }

    /// `[-2, 2]^2`, the default scene and sampling domain.
    pub fn default_domain() -> Self {
        Extent::square([0.0, 0.0], 2.0)
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn is_nonempty(&self) -> bool {
        self.width() > 0.0 && self.height() > 0.0
    }

    pub fn is_square(&self) -> bool {
        (self.width() - self.height()).abs() <= 1e-12 * self.width().abs().max(1.0)
    }

    pub fn contains_point(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn contains_extent(&self, other: &Extent) -> bool {
        self.contains_point(other.min) && self.contains_point(other.max)
    }

    pub fn union(&self, other: &Extent) -> Extent {
        Extent {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
        }
    }

    /// Largest distance from the origin to any corner.
    pub fn max_radius(&self) -> f64 {
        let xs = [self.min[0], self.max[0]];
        let ys = [self.min[1], self.max[1]];
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| x.hypot(*y)))
            .fold(0.0, f64::max)
    }
}

/// Raster over a physical extent. Pixel `(row, col)` has its center at
/// `x = min.x + (col + 1/2) dx`, `y = max.y - (row + 1/2) dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelImage {
    width: usize,
    height: usize,
    values: Vec<f32>,
    extent: Extent,
}

impl PixelImage {
    pub fn new(width: usize, height: usize, values: Vec<f32>, extent: Extent) -> Result<Self> {
        if width == 0 || height == 0 || width * height != values.len() {
            return Err(Error::Config(format!(
                "image of {width}x{height} cannot hold {} values",
                values.len()
            )));
        }
        if !extent.is_nonempty() {
            return Err(Error::Config("image extent is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(PixelImage {
            width,
            height,
            values,
            extent,
        })
    }

    pub fn zeros(width: usize, height: usize, extent: Extent) -> Self {
        PixelImage {
            width,
            height,
            values: vec![0.0; width * height],
            extent,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> [f64; 2] {
        let dx = self.extent.width() / self.width as f64;
        let dy = self.extent.height() / self.height as f64;
        [
            self.extent.min[0] + (col as f64 + 0.5) * dx,
            self.extent.max[1] - (row as f64 + 0.5) * dy,
        ]
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        values: Vec<f32>,
        extent: Extent,
    ) -> Self {
        debug_assert_eq!(width * height, values.len());
        PixelImage {
            width,
            height,
            values,
            extent,
        }
    }

    /// Bilinear resampling onto a `width` x `height` raster over the same extent.
    /// Samples are taken at the target pixel centers.
    pub fn resample_bilinear(&self, width: usize, height: usize) -> PixelImage {
        let src = |r: f64, c: f64| bilinear(&self.values, self.width, self.height, r, c);
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        let mut out = Vec::with_capacity(width * height);
        for row in 0..height {
            let r = (row as f64 + 0.5) * sy - 0.5;
            for col in 0..width {
                let c = (col as f64 + 0.5) * sx - 0.5;
                out.push(src(r, c).clamp(0.0, 1.0) as f32);
            }
        }
        PixelImage::from_parts_unchecked(width, height, out, self.extent)
    }

    pub fn write_osmi(&self, path: &Path) -> Result<()> {
        write_osmi(path, self.width, self.height, &self.values)
    }

    /// Reads an `OSMI` file; the extent is not part of the format and must be supplied.
    pub fn read_osmi(path: &Path, extent: Extent) -> Result<Self> {
        let (w, h, values) = read_osmi(path)?;
        PixelImage::new(w, h, values, extent)
    }

    /// 8-bit grayscale PNG preview.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        write_png_gray(path, self.width, self.height, &self.values)
    }
}

/// Bilinear lookup in a row-major grid at fractional `(row, col)`; clamps at the edges.
pub(crate) fn bilinear(values: &[f32], width: usize, height: usize, r: f64, c: f64) -> f64 {
    let r = r.clamp(0.0, (height - 1) as f64);
    let c = c.clamp(0.0, (width - 1) as f64);
    let r0 = (r.floor() as usize).min(height.saturating_sub(2));
    let c0 = (c.floor() as usize).min(width.saturating_sub(2));
    let r1 = (r0 + 1).min(height - 1);
    let c1 = (c0 + 1).min(width - 1);
    let fr = r - r0 as f64;
    let fc = c - c0 as f64;
    let v = |rr: usize, cc: usize| values[rr * width + cc] as f64;
    let top = v(r0, c0) * (1.0 - fc) + v(r0, c1) * fc;
    let bottom = v(r1, c0) * (1.0 - fc) + v(r1, c1) * fc;
    top * (1.0 - fr) + bottom * fr
}

pub fn write_osmi(path: &Path, width: usize, height: usize, values: &[f32]) -> Result<()> {
    if width * height != values.len() {
        return Err(Error::Format {
            path: path.into(),
            detail: format!("{width}x{height} image with {} values", values.len()),
        });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut buf = Vec::with_capacity(16 + 4 * values.len());
    buf.extend_from_slice(OSMI_MAGIC);
    buf.extend_from_slice(&OSMI_VERSION.to_le_bytes());
    buf.extend_from_slice(&(width as u32).to_le_bytes());
    buf.extend_from_slice(&(height as u32).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_osmi(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_osmi(&bytes).map_err(|detail| Error::Format {
        path: path.into(),
        detail,
    })
}

pub(crate) fn decode_osmi(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f32>), String> {
    if bytes.len() < 16 || &bytes[..4] != OSMI_MAGIC {
        return Err("missing OSMI magic".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != OSMI_VERSION {
        return Err(format!("unsupported OSMI version {version}"));
    }
    let width = word(8) as usize;
    let height = word(12) as usize;
    let expected = 16 + 4 * width * height;
    if bytes.len() != expected {
        return Err(format!(
            "{width}x{height} image needs {expected} bytes, found {}",
            bytes.len()
        ));
    }
    let values = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((width, height, values))
}

pub fn write_png_gray(path: &Path, width: usize, height: usize, values: &[f32]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let to_png_err = |e: png::EncodingError| Error::Format {
        path: path.into(),
        detail: e.to_string(),
    };
    let mut writer = encoder.write_header().map_err(to_png_err)?;
    let data: Vec<u8> = values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    writer.write_image_data(&data).map_err(to_png_err)?;
    writer.finish().map_err(to_png_err)
}
