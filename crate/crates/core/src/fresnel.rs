//! Reader for Fresnel-Institute style `.exp` files and the preprocessing
//! that turns one (frequency, transmitter) slice into arc data for the
//! derivative-free indicator.
//!
//! Lengths are rescaled so that 40 mm is one unit; the receivers then sit on
//! a circle of radius 19.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    incident_plane_wave, scattered_at, solve_scene, ForwardConfig, MeasurementCurve, ScatteredData,
};
use crate::imaging::{
    indicator_farfield, upsample_bilinear, ImagingResult, IndicatorParams, SamplingGrid,
};
use crate::pixel::PixelImage;
use crate::scene::{ContrastScene, ShapePrimitive};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Metres per unit length.
pub const LENGTH_UNIT: f64 = 0.04;
/// 760 mm receiver radius in rescaled units.
pub const RECEIVER_RADIUS: f64 = 19.0;

/// `k = 2 pi f / c` in rescaled units, `f` in GHz.
pub fn wave_number(frequency_ghz: f64) -> f64 {
    2.0 * PI * frequency_ghz * 1e9 / SPEED_OF_LIGHT * LENGTH_UNIT
}

/// Zero-based column of each field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub transmitter: usize,
    pub receiver: usize,
    pub frequency: usize,
    pub total_re: usize,
    pub total_im: usize,
    pub incident_re: usize,
    pub incident_im: usize,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            transmitter: 0,
            receiver: 1,
            frequency: 2,
            total_re: 3,
            total_im: 4,
            incident_re: 5,
            incident_im: 6,
        }
    }
}

impl ColumnMap {
    fn columns(&self) -> [usize; 7] {
        [
            self.transmitter,
            self.receiver,
            self.frequency,
            self.total_re,
            self.total_im,
            self.incident_re,
            self.incident_im,
        ]
    }

    pub fn width(&self) -> usize {
        self.columns().iter().max().unwrap() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.columns();
        if c.iter().collect::<BTreeSet<_>>().len() != c.len() {
            return Err(Error::Config(format!(
                "column map {c:?} assigns a column twice"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FresnelRecord {
    pub transmitter_deg: f64,
    pub receiver_deg: f64,
    pub frequency_ghz: f64,
    pub total: Complex64,
    pub incident: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    /// One-based.
    pub line: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FresnelSet {
    pub records: Vec<FresnelRecord>,
    pub transmitters: Vec<f64>,
    pub receivers: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub source: String,
    /// Record count differs from the product of the distinct values.
    pub ragged: bool,
    pub diagnostics: Vec<LineDiagnostic>,
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl FresnelSet {
    pub fn from_records(records: Vec<FresnelRecord>, source: &str) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientData(format!(
                "{source}: no data records"
            )));
        }
        for r in &records {
            if !(r.frequency_ghz > 0.0 && r.frequency_ghz.is_finite()) {
                return Err(Error::Config(format!(
                    "frequency {} GHz must be positive",
                    r.frequency_ghz
                )));
            }
            if !(r.transmitter_deg.is_finite() && r.receiver_deg.is_finite()) {
                return Err(Error::Config("record angles must be finite".into()));
            }
        }
        let transmitters = distinct(records.iter().map(|r| r.transmitter_deg));
        let receivers = distinct(records.iter().map(|r| r.receiver_deg));
        let frequencies = distinct(records.iter().map(|r| r.frequency_ghz));
        let ragged = records.len() != transmitters.len() * receivers.len() * frequencies.len();
        Ok(FresnelSet {
            records,
            transmitters,
            receivers,
            frequencies,
            source: source.into(),
            ragged,
            diagnostics: Vec::new(),
        })
    }

    /// Text in the layout of `map`, numbers at 9 significant digits; unused
    /// columns are written as 0.
    pub fn to_text(&self, map: &ColumnMap) -> String {
        let mut out =
            String::from("# tx_deg rx_deg freq_ghz total_re total_im incident_re incident_im\n");
        let mut row = vec![0.0; map.width()];
        for r in &self.records {
            row[map.transmitter] = r.transmitter_deg;
            row[map.receiver] = r.receiver_deg;
            row[map.frequency] = r.frequency_ghz;
            row[map.total_re] = r.total.re;
            row[map.total_im] = r.total.im;
            row[map.incident_re] = r.incident.re;
            row[map.incident_im] = r.incident.im;
            let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Parses whitespace-separated numeric columns. Blank lines, `#` comments and
/// lines starting with a non-numeric token are skipped. In strict mode any
/// malformed data line is an error naming its line number; in lenient mode
/// such lines are collected in `diagnostics`.
pub fn parse(text: &str, map: &ColumnMap, mode: ParseMode, source: &str) -> Result<FresnelSet> {
    map.validate()?;
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut width: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let Some(first) = tokens.first() else {
            continue;
        };
        if first.starts_with('#') || first.parse::<f64>().is_err() {
            continue;
        }
        let expected = *width.get_or_insert(tokens.len());
        let mut bad = |detail: String| diagnostics.push(LineDiagnostic { line, detail });
        if tokens.len() != expected {
            bad(format!("{} columns, expected {expected}", tokens.len()));
            continue;
        }
        if tokens.len() < map.width() {
            return Err(Error::Parse {
                line,
                detail: format!("{} columns, column map needs {}", tokens.len(), map.width()),
            });
        }
        let values: std::result::Result<Vec<f64>, usize> = tokens
            .iter()
            .enumerate()
            .map(|(c, t)| t.parse::<f64>().map_err(|_| c + 1))
            .collect();
        let v = match values {
            Ok(v) => v,
            Err(c) => {
                bad(format!("column {c} is not a number"));
                continue;
            }
        };
        records.push(FresnelRecord {
            transmitter_deg: v[map.transmitter],
            receiver_deg: v[map.receiver],
            frequency_ghz: v[map.frequency],
            total: Complex64::new(v[map.total_re], v[map.total_im]),
            incident: Complex64::new(v[map.incident_re], v[map.incident_im]),
        });
    }
    if mode == ParseMode::Strict {
        if let Some(d) = diagnostics.first() {
            return Err(Error::Parse {
                line: d.line,
                detail: d.detail.clone(),
            });
        }
    }
    let mut set = FresnelSet::from_records(records, source)?;
    set.diagnostics = diagnostics;
    Ok(set)
}

pub fn parse_file(path: &Path, map: &ColumnMap, mode: ParseMode) -> Result<FresnelSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, map, mode, &path.display().to_string())
}

fn find(values: &[f64], target: f64, what: &str) -> Result<f64> {
    values
        .iter()
        .copied()
        .find(|v| (v - target).abs() <= 1e-9 * target.abs().max(1.0))
        .ok_or_else(|| {
            Error::Lookup(format!(
                "{what} {target} not in the data set (have {values:?})"
            ))
        })
}

/// Scattered field `total - incident` on the receiver arc of radius 19 for
/// one frequency and transmitter, with `k` in rescaled units.
pub fn to_scattered(
    set: &FresnelSet,
    frequency_ghz: f64,
    transmitter_deg: f64,
) -> Result<ScatteredData> {
    let f = find(&set.frequencies, frequency_ghz, "frequency (GHz)")?;
    let t = find(
        &set.transmitters,
        transmitter_deg,
        "transmitter angle (deg)",
    )?;
    let mut slice: Vec<&FresnelRecord> = set
        .records
        .iter()
        .filter(|r| r.frequency_ghz == f && r.transmitter_deg == t)
        .collect();
    slice.sort_by(|a, b| a.receiver_deg.total_cmp(&b.receiver_deg));
    if slice
        .windows(2)
        .any(|w| w[0].receiver_deg == w[1].receiver_deg)
    {
        return Err(Error::Config(format!(
            "duplicate receiver angle at {f} GHz, transmitter {t} deg"
        )));
    }
    let curve = MeasurementCurve::arc(
        RECEIVER_RADIUS,
        slice.iter().map(|r| r.receiver_deg).collect(),
    )?;
    let us = slice.iter().map(|r| r.total - r.incident).collect();
    ScatteredData::new(curve, us, wave_number(f))
}

/// Far-field variant of the indicator on the arc data, normalized, plus its
/// `size x size` bilinear upsampling.
pub fn image_fresnel(
    set: &FresnelSet,
    frequency_ghz: f64,
    transmitter_deg: f64,
    grid: &SamplingGrid,
    params: &IndicatorParams,
    size: usize,
) -> Result<(ImagingResult, PixelImage)> {
    let data = to_scattered(set, frequency_ghz, transmitter_deg)?;
    let params = IndicatorParams {
        normalize: true,
        ..*params
    };
    let img = indicator_farfield(&data, grid, &params)?;
    let up = upsample_bilinear(&img, size)?;
    Ok((img, up))
}

/// Geometry of a simulated single-frequency measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StandIn {
    pub frequency_ghz: f64,
    /// Direction of the incident plane wave, degrees.
    pub transmitter_deg: f64,
    pub receivers_deg: Vec<f64>,
    pub scene: ContrastScene,
    pub forward: ForwardConfig,
}

impl Default for StandIn {
    /// Disk of radius 15 mm centered 30 mm below the origin with relative
    /// permittivity 3, receivers every 5 degrees from 60 to 300, 8 GHz.
    fn default() -> Self {
        let disk = ShapePrimitive::disk([0.0, -0.75], 0.375).unwrap();
        StandIn {
            frequency_ghz: 8.0,
            transmitter_deg: 90.0,
            receivers_deg: (0..49).map(|i| 60.0 + 5.0 * i as f64).collect(),
            scene: ContrastScene::default()
                .with_shape(disk, Complex64::new(2.0, 0.0))
                .unwrap(),
            forward: ForwardConfig::default(),
        }
    }
}

/// Synthesizes a `FresnelSet` by solving the forward problem for `cfg.scene`.
pub fn simulate(cfg: &StandIn) -> Result<FresnelSet> {
    let k = wave_number(cfg.frequency_ghz);
    let theta = cfg.transmitter_deg.to_radians();
    let sol = solve_scene(&cfg.scene, k, theta, &cfg.forward)?;
    let curve = MeasurementCurve::arc(RECEIVER_RADIUS, cfg.receivers_deg.clone())?;
    let us = scattered_at(&sol.total, &sol.grid, curve.points())?;
    let inc = incident_plane_wave(k, theta, curve.points());
    let records = cfg
        .receivers_deg
        .iter()
        .zip(us.iter().zip(&inc))
        .map(|(rx, (u, ui))| FresnelRecord {
            transmitter_deg: cfg.transmitter_deg,
            receiver_deg: *rx,
            frequency_ghz: cfg.frequency_ghz,
            total: ui + u,
            incident: *ui,
        })
        .collect();
    FresnelSet::from_records(records, "simulated")
}
