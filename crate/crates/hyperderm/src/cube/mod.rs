//! Hyperspectral cubes: in-memory layout, capture metadata, the `HSC`
//! on-disk format, band utilities and montages.
//!
//! A cube is `rows x cols x bands` with band-interleaved-by-pixel layout
//! (band index runs fastest), matching how the snapshot sensor delivers
//! data. Payloads are either 12-bit raw counts or real-valued reflectance.

mod band;
mod hsc;
mod montage;
mod pgm;

pub use band::{
    BandLookup, BandMap, BandMapError, DEFAULT_CHANNEL_COUNT, FWHM_AT_450_NM, FWHM_AT_950_NM,
    GRID_START_NM, GRID_STEP_NM, WAVELENGTH_MAX_NM, WAVELENGTH_MIN_NM,
};
pub use hsc::{decode_cube, encode_cube, load_cube, save_cube, HSC_MAGIC, HSC_VERSION};
pub use montage::{band_montage, montage_default_wavelengths, Montage, MontageLabel};
pub use pgm::{encode_pgm, write_pgm};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

/// Native sensor height in pixels.
pub const SENSOR_ROWS: u32 = 290;
/// Native sensor width in pixels.
pub const SENSOR_COLS: u32 = 275;
/// Counts at and above the 12-bit ceiling are saturated.
pub const SATURATION_COUNT: u16 = 4095;
/// Default square field of view, mm.
pub const DEFAULT_FOV_MM: (f64, f64) = (20.0, 20.0);
/// Default working distance from front lens to skin, mm.
pub const DEFAULT_WORKING_DISTANCE_MM: f64 = 56.0;

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("cube dimensions must all be positive")]
    EmptyDimension,
    #[error("band count {bands} disagrees with band map channels {channels}")]
    BandCountMismatch { bands: usize, channels: usize },
    #[error("raw count {value} at flat index {index} exceeds the 12-bit ceiling")]
    ValueOutOfRange { index: usize, value: u16 },
    #[error("non-finite reflectance at flat index {index}")]
    NonFiniteValue { index: usize },
    #[error("band index {index} out of range for {count} bands")]
    BandIndexOutOfRange { index: usize, count: usize },
    #[error("input must be positive: {0}")]
    NonPositiveInput(&'static str),
    #[error("montage wavelength list is empty")]
    EmptyWavelengthList,
    #[error(transparent)]
    BandMap(#[from] BandMapError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which physical quantity the payload stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    RawCounts,
    Reflectance,
}

impl Domain {
    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Domain::RawCounts => 0,
            Domain::Reflectance => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Domain::RawCounts),
            1 => Some(Domain::Reflectance),
            _ => None,
        }
    }
}

/// Cube payload. Raw counts are 12-bit values in `u16`; reflectance is
/// stored as `f32` (finite, not clamped to [0, 1]).
#[derive(Clone, Debug, PartialEq)]
pub enum CubeData {
    RawCounts(Vec<u16>),
    Reflectance(Vec<f32>),
}

impl CubeData {
    pub fn len(&self) -> usize {
        match self {
            CubeData::RawCounts(v) => v.len(),
            CubeData::Reflectance(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> Domain {
        match self {
            CubeData::RawCounts(_) => Domain::RawCounts,
            CubeData::Reflectance(_) => Domain::Reflectance,
        }
    }
}

/// Anatomical site of a capture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BodyPart {
    Arms,
    Legs,
    Face,
    Neck,
    Hands,
    Torso,
    Abdomen,
    Other,
}

impl fmt::Display for BodyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BodyPart::Arms => "Arms",
            BodyPart::Legs => "Legs",
            BodyPart::Face => "Face",
            BodyPart::Neck => "Neck",
            BodyPart::Hands => "Hands",
            BodyPart::Torso => "Torso",
            BodyPart::Abdomen => "Abdomen",
            BodyPart::Other => "Other",
        };
        f.write_str(s)
    }
}

impl FromStr for BodyPart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "arms" => Ok(BodyPart::Arms),
            "legs" => Ok(BodyPart::Legs),
            "face" => Ok(BodyPart::Face),
            "neck" => Ok(BodyPart::Neck),
            "hands" => Ok(BodyPart::Hands),
            "torso" => Ok(BodyPart::Torso),
            "abdomen" => Ok(BodyPart::Abdomen),
            "other" => Ok(BodyPart::Other),
            _ => Err(format!("unknown body part: {s}")),
        }
    }
}

/// Role a persisted cube plays in the calibration workflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceRole {
    Dark,
    White,
}

/// Capture-time metadata carried with every cube.
///
/// Serialized as JSON inside the `HSC` container; the optional reference
/// fields are only present on persisted dark/white means. Timestamps are
/// caller-supplied ISO-8601 strings so outputs stay byte-deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub fov_mm: (f64, f64),
    pub working_distance_mm: f64,
    pub patient_id: String,
    pub body_part: BodyPart,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_role: Option<ReferenceRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_averaged: Option<u32>,
}

impl Default for CaptureMeta {
    fn default() -> Self {
        Self {
            fov_mm: DEFAULT_FOV_MM,
            working_distance_mm: DEFAULT_WORKING_DISTANCE_MM,
            patient_id: String::new(),
            body_part: BodyPart::Other,
            timestamp: "1970-01-01T00:00:00Z".to_owned(),
            reference_role: None,
            frames_averaged: None,
        }
    }
}

impl CaptureMeta {
    fn validate(&self) -> Result<(), CubeError> {
        if !(self.fov_mm.0 > 0.0 && self.fov_mm.1 > 0.0) {
            return Err(CubeError::NonPositiveInput("fov_mm"));
        }
        if !(self.working_distance_mm > 0.0) {
            return Err(CubeError::NonPositiveInput("working_distance_mm"));
        }
        Ok(())
    }
}

/// A hyperspectral capture: dimensions, payload, band map and metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperCube {
    rows: usize,
    cols: usize,
    bands: usize,
    data: CubeData,
    band_map: BandMap,
    meta: CaptureMeta,
}

impl HyperCube {
    /// Builds a cube after checking every structural invariant: positive
    /// dimensions, payload length `rows*cols*bands`, band map channel count
    /// equal to `bands`, raw counts within 12 bits, reflectance finite.
    pub fn new(
        rows: usize,
        cols: usize,
        data: CubeData,
        band_map: BandMap,
        meta: CaptureMeta,
    ) -> Result<Self, CubeError> {
        let bands = band_map.channel_count();
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(CubeError::EmptyDimension);
        }
        let expected = rows * cols * bands;
        if data.len() != expected {
            return Err(CubeError::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        match &data {
            CubeData::RawCounts(v) => {
                for (i, &c) in v.iter().enumerate() {
                    if c > SATURATION_COUNT {
                        return Err(CubeError::ValueOutOfRange { index: i, value: c });
                    }
                }
            }
            CubeData::Reflectance(v) => {
                for (i, &r) in v.iter().enumerate() {
                    if !r.is_finite() {
                        return Err(CubeError::NonFiniteValue { index: i });
                    }
                }
            }
        }
        meta.validate()?;
        Ok(Self {
            rows,
            cols,
            bands,
            data,
            band_map,
            meta,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn domain(&self) -> Domain {
        self.data.domain()
    }

    pub fn data(&self) -> &CubeData {
        &self.data
    }

    pub fn band_map(&self) -> &BandMap {
        &self.band_map
    }

    pub fn meta(&self) -> &CaptureMeta {
        &self.meta
    }

    /// Flat index of `(row, col, band)` in the band-interleaved layout.
    #[inline]
    pub fn flat_index(&self, row: usize, col: usize, band: usize) -> usize {
        (row * self.cols + col) * self.bands + band
    }

    /// Sample value as `f64` regardless of payload domain.
    #[inline]
    pub fn value(&self, row: usize, col: usize, band: usize) -> f64 {
        let i = self.flat_index(row, col, band);
        match &self.data {
            CubeData::RawCounts(v) => v[i] as f64,
            CubeData::Reflectance(v) => v[i] as f64,
        }
    }

    /// Copies band `k` into a `rows x cols` row-major plane. The copy is
    /// independent of the cube; mutating it leaves the cube untouched.
    pub fn band_slice(&self, k: usize) -> Result<Vec<f64>, CubeError> {
        if k >= self.bands {
            return Err(CubeError::BandIndexOutOfRange {
                index: k,
                count: self.bands,
            });
        }
        let mut plane = Vec::with_capacity(self.rows * self.cols);
        for px in 0..self.rows * self.cols {
            let i = px * self.bands + k;
            let v = match &self.data {
                CubeData::RawCounts(v) => v[i] as f64,
                CubeData::Reflectance(v) => v[i] as f64,
            };
            plane.push(v);
        }
        Ok(plane)
    }
}

/// Dense `f64` cube used for reference means and simulation ground truth.
///
/// Shares the band-interleaved layout of [`HyperCube`] but carries no
/// metadata and no domain tag; it exists so calibration math runs in full
/// double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct RealCube {
    rows: usize,
    cols: usize,
    bands: usize,
    data: Vec<f64>,
}

impl RealCube {
    pub fn new(rows: usize, cols: usize, bands: usize, data: Vec<f64>) -> Result<Self, CubeError> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(CubeError::EmptyDimension);
        }
        let expected = rows * cols * bands;
        if data.len() != expected {
            return Err(CubeError::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            bands,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, bands: usize) -> Self {
        Self {
            rows,
            cols,
            bands,
            data: vec![0.0; rows * cols * bands],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.bands)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[(row * self.cols + col) * self.bands + band]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, band: usize, v: f64) {
        self.data[(row * self.cols + col) * self.bands + band] = v;
    }
}

/// Pixels per square millimetre for a sensor of `sensor_px = (rows, cols)`
/// imaging a field of view of `fov_mm = (width, height)` millimetres.
pub fn area_pixel_density(sensor_px: (u32, u32), fov_mm: (f64, f64)) -> Result<f64, CubeError> {
    if sensor_px.0 == 0 || sensor_px.1 == 0 {
        return Err(CubeError::NonPositiveInput("sensor_px"));
    }
    if !(fov_mm.0 > 0.0) || !(fov_mm.1 > 0.0) || !fov_mm.0.is_finite() || !fov_mm.1.is_finite() {
        return Err(CubeError::NonPositiveInput("fov_mm"));
    }
    Ok(sensor_px.0 as f64 * sensor_px.1 as f64 / (fov_mm.0 * fov_mm.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_map(bands: usize) -> BandMap {
        let centers: Vec<f32> = (0..bands).map(|k| 500.0 + 10.0 * k as f32).collect();
        let fwhm = vec![8.0; bands];
        BandMap::new(centers, fwhm).unwrap()
    }

    #[test]
    fn native_sensor_density_matches_instrument() {
        let d = area_pixel_density((SENSOR_ROWS, SENSOR_COLS), DEFAULT_FOV_MM).unwrap();
        assert!(
            (d - 199.375).abs() < 1e-12,
            "290x275 over 20x20 mm must give 199.375 px/mm^2, got {d}"
        );
    }

    #[test]
    fn density_rejects_degenerate_inputs() {
        assert!(area_pixel_density((0, 275), (20.0, 20.0)).is_err());
        assert!(area_pixel_density((290, 275), (0.0, 20.0)).is_err());
        assert!(area_pixel_density((290, 275), (-1.0, 20.0)).is_err());
    }

    #[test]
    fn cube_rejects_length_mismatch() {
        let map = tiny_map(3);
        let err = HyperCube::new(
            2,
            2,
            CubeData::RawCounts(vec![0; 11]),
            map,
            CaptureMeta::default(),
        );
        assert!(matches!(
            err,
            Err(CubeError::DimensionMismatch {
                expected: 12,
                actual: 11
            })
        ));
    }

    #[test]
    fn cube_rejects_overrange_counts() {
        let map = tiny_map(1);
        let mut counts = vec![0u16; 4];
        counts[2] = 4096;
        let err = HyperCube::new(
            2,
            2,
            CubeData::RawCounts(counts),
            map,
            CaptureMeta::default(),
        );
        assert!(matches!(
            err,
            Err(CubeError::ValueOutOfRange {
                index: 2,
                value: 4096
            })
        ));
    }

    #[test]
    fn cube_rejects_non_finite_reflectance() {
        let map = tiny_map(1);
        let err = HyperCube::new(
            1,
            2,
            CubeData::Reflectance(vec![0.5, f32::NAN]),
            map,
            CaptureMeta::default(),
        );
        assert!(matches!(err, Err(CubeError::NonFiniteValue { index: 1 })));
    }

    #[test]
    fn band_slice_is_an_independent_copy() {
        let map = tiny_map(2);
        let data: Vec<u16> = (0..8).collect();
        let cube = HyperCube::new(
            2,
            2,
            CubeData::RawCounts(data),
            map,
            CaptureMeta::default(),
        )
        .unwrap();
        let mut plane = cube.band_slice(1).unwrap();
        assert_eq!(plane, vec![1.0, 3.0, 5.0, 7.0]);
        plane[0] = 999.0;
        assert_eq!(cube.value(0, 0, 1), 1.0, "cube must not see the edit");
        assert!(cube.band_slice(2).is_err(), "band 2 of 2 must be rejected");
    }

    #[test]
    fn band_slice_matches_direct_indexing_exhaustively() {
        let rows = 3;
        let cols = 4;
        let bands = 5;
        let map = tiny_map(bands);
        let data: Vec<u16> = (0..rows * cols * bands).map(|i| (i % 4096) as u16).collect();
        let cube = HyperCube::new(
            rows,
            cols,
            CubeData::RawCounts(data),
            map,
            CaptureMeta::default(),
        )
        .unwrap();
        for k in 0..bands {
            let plane = cube.band_slice(k).unwrap();
            for r in 0..rows {
                for c in 0..cols {
                    assert_eq!(
                        plane[r * cols + c],
                        cube.value(r, c, k),
                        "plane[{r},{c}] vs cube value at band {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn body_part_round_trips_via_str() {
        for bp in [
            BodyPart::Arms,
            BodyPart::Legs,
            BodyPart::Face,
            BodyPart::Neck,
            BodyPart::Hands,
            BodyPart::Torso,
            BodyPart::Abdomen,
            BodyPart::Other,
        ] {
            let s = bp.to_string();
            assert_eq!(s.parse::<BodyPart>().unwrap(), bp);
        }
        assert!("knee".parse::<BodyPart>().is_err());
    }
}
