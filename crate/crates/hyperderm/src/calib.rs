//! Flat-field reflectance calibration against dark and white references.
//!
//! The camera reports counts X; a dark mean D (shutter closed / lights off)
//! and a white mean W (uniform reflectance target) convert them to
//! reflectance per cell:
//!
//! ```text
//! R = (X - D) / (W - D)      wherever W - D >= epsilon
//! R = 0                      elsewhere (degenerate cell, counted)
//! ```
//!
//! R is deliberately not clamped: values above 1 are legitimate for
//! specular highlights and matter for quality control. Saturated input
//! cells (counts at the 12-bit ceiling) and near-saturated cells are
//! tallied separately in the diagnostics.

use crate::cube::{
    BandMap, CaptureMeta, CubeData, CubeError, Domain, HyperCube, RealCube, ReferenceRole,
    SATURATION_COUNT,
};
use serde::Serialize;
use thiserror::Error;

/// Frames averaged into each reference in the standard protocol.
pub const DEFAULT_FRAMES_AVERAGED: u32 = 100;
/// Default minimum usable white-minus-dark difference, in counts.
pub const DEFAULT_EPSILON: f64 = 1.0;
/// Counts at or above this (but below the ceiling) are "near saturation".
pub const NEAR_SATURATION_COUNT: u16 = 4000;
/// A band is suspect when more than half its cells are degenerate.
pub const SUSPECT_BAND_FRACTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum CalibError {
    #[error("no frames to average")]
    EmptyInput,
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("expected a raw-counts cube, got {0:?}")]
    DomainMismatch(Domain),
    #[error("frames_averaged must be at least 1")]
    NoFramesAveraged,
    #[error("cube carries reference role {found:?}, expected {expected:?}")]
    WrongReferenceRole {
        expected: ReferenceRole,
        found: Option<ReferenceRole>,
    },
    #[error("dark and white disagree on frames_averaged: {dark} vs {white}")]
    InconsistentFrames { dark: u32, white: u32 },
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// A matched dark/white reference pair, stored in full `f64` precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePair {
    dark: RealCube,
    white: RealCube,
    frames_averaged: u32,
}

impl ReferencePair {
    pub fn new(dark: RealCube, white: RealCube, frames_averaged: u32) -> Result<Self, CalibError> {
        if dark.shape() != white.shape() {
            return Err(CalibError::ShapeMismatch {
                context: format!(
                    "dark {:?} vs white {:?}",
                    dark.shape(),
                    white.shape()
                ),
            });
        }
        if frames_averaged == 0 {
            return Err(CalibError::NoFramesAveraged);
        }
        Ok(Self {
            dark,
            white,
            frames_averaged,
        })
    }

    pub fn dark(&self) -> &RealCube {
        &self.dark
    }

    pub fn white(&self) -> &RealCube {
        &self.white
    }

    pub fn frames_averaged(&self) -> u32 {
        self.frames_averaged
    }

    /// Persists the pair as two reflectance-payload cubes whose meta records
    /// the role and frame count. Values are narrowed to `f32` on the way out.
    pub fn to_cubes(
        &self,
        band_map: &BandMap,
        base_meta: &CaptureMeta,
    ) -> Result<(HyperCube, HyperCube), CalibError> {
        let dark = reference_cube(
            &self.dark,
            band_map,
            base_meta,
            ReferenceRole::Dark,
            self.frames_averaged,
        )?;
        let white = reference_cube(
            &self.white,
            band_map,
            base_meta,
            ReferenceRole::White,
            self.frames_averaged,
        )?;
        Ok((dark, white))
    }

    /// Rebuilds a pair from persisted reference cubes, checking the recorded
    /// roles so a swapped dark/white pair is caught immediately.
    pub fn from_cubes(dark: &HyperCube, white: &HyperCube) -> Result<Self, CalibError> {
        let d = reference_values(dark, ReferenceRole::Dark)?;
        let w = reference_values(white, ReferenceRole::White)?;
        let df = dark.meta().frames_averaged.unwrap_or(1);
        let wf = white.meta().frames_averaged.unwrap_or(1);
        if df != wf {
            return Err(CalibError::InconsistentFrames { dark: df, white: wf });
        }
        Self::new(d, w, df)
    }
}

/// Wraps reference values into a persistable cube with role metadata.
pub fn reference_cube(
    values: &RealCube,
    band_map: &BandMap,
    base_meta: &CaptureMeta,
    role: ReferenceRole,
    frames_averaged: u32,
) -> Result<HyperCube, CalibError> {
    let (rows, cols, bands) = values.shape();
    if band_map.channel_count() != bands {
        return Err(CalibError::ShapeMismatch {
            context: format!(
                "reference has {bands} bands, band map has {}",
                band_map.channel_count()
            ),
        });
    }
    let mut meta = base_meta.clone();
    meta.reference_role = Some(role);
    meta.frames_averaged = Some(frames_averaged);
    let data: Vec<f32> = values.data().iter().map(|&v| v as f32).collect();
    Ok(HyperCube::new(
        rows,
        cols,
        CubeData::Reflectance(data),
        band_map.clone(),
        meta,
    )?)
}

/// Extracts reference values from a persisted cube after checking its role.
pub fn reference_values(cube: &HyperCube, expected: ReferenceRole) -> Result<RealCube, CalibError> {
    if cube.meta().reference_role != Some(expected) {
        return Err(CalibError::WrongReferenceRole {
            expected,
            found: cube.meta().reference_role,
        });
    }
    let data: Vec<f64> = match cube.data() {
        CubeData::Reflectance(v) => v.iter().map(|&x| x as f64).collect(),
        CubeData::RawCounts(v) => v.iter().map(|&x| x as f64).collect(),
    };
    Ok(RealCube::new(cube.rows(), cube.cols(), cube.bands(), data)?)
}

/// Per-calibration quality counters, emitted as a JSON sidecar by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationDiagnostics {
    /// Fraction of input cells at the 12-bit ceiling.
    pub saturated_fraction: f64,
    /// Fraction of input cells at or above 4000 counts but below the ceiling.
    pub near_saturated_fraction: f64,
    /// Fraction of cells where white minus dark fell below epsilon.
    pub degenerate_fraction: f64,
    pub epsilon: f64,
}

/// Reference health report from [`validate_references`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceReport {
    /// Fraction of all cells with white minus dark below epsilon.
    pub degenerate_fraction: f64,
    /// Fraction of all cells where white does not exceed dark.
    pub white_not_above_dark_fraction: f64,
    /// Mean white-minus-dark difference per band.
    pub per_band_mean_difference: Vec<f64>,
    /// Degenerate cell fraction per band.
    pub per_band_degenerate_fraction: Vec<f64>,
    /// Bands with more than half their cells degenerate (dead bands).
    pub suspect_bands: Vec<usize>,
    pub epsilon: f64,
}

/// Means a stack of same-shaped raw frames into an `f64` cube.
pub fn average_frames(frames: &[HyperCube]) -> Result<RealCube, CalibError> {
    let first = frames.first().ok_or(CalibError::EmptyInput)?;
    if first.domain() != Domain::RawCounts {
        return Err(CalibError::DomainMismatch(first.domain()));
    }
    let (rows, cols, bands) = (first.rows(), first.cols(), first.bands());
    let n = rows * cols * bands;
    let mut acc = vec![0.0f64; n];
    for (fi, frame) in frames.iter().enumerate() {
        if frame.domain() != Domain::RawCounts {
            return Err(CalibError::DomainMismatch(frame.domain()));
        }
        if (frame.rows(), frame.cols(), frame.bands()) != (rows, cols, bands) {
            return Err(CalibError::ShapeMismatch {
                context: format!(
                    "frame {fi} is {}x{}x{}, expected {rows}x{cols}x{bands}",
                    frame.rows(),
                    frame.cols(),
                    frame.bands()
                ),
            });
        }
        if let CubeData::RawCounts(v) = frame.data() {
            for (a, &c) in acc.iter_mut().zip(v.iter()) {
                *a += c as f64;
            }
        }
    }
    let scale = 1.0 / frames.len() as f64;
    for a in &mut acc {
        *a *= scale;
    }
    Ok(RealCube::new(rows, cols, bands, acc)?)
}

/// Core calibration on real-valued counts. Public so synthetic pipelines
/// and property tests can exercise the exact arithmetic without building
/// integer cubes first.
pub fn compute_reflectance_real(
    x: &RealCube,
    refs: &ReferencePair,
    epsilon: f64,
) -> Result<(RealCube, CalibrationDiagnostics), CalibError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(CalibError::NonPositiveEpsilon(epsilon));
    }
    if x.shape() != refs.dark().shape() {
        return Err(CalibError::ShapeMismatch {
            context: format!(
                "measurement {:?} vs references {:?}",
                x.shape(),
                refs.dark().shape()
            ),
        });
    }
    let n = x.data().len();
    let mut out = Vec::with_capacity(n);
    let mut saturated = 0usize;
    let mut near_saturated = 0usize;
    let mut degenerate = 0usize;
    let sat = SATURATION_COUNT as f64;
    let near = NEAR_SATURATION_COUNT as f64;
    let references = refs.dark().data().iter().zip(refs.white().data());
    for (&xv, (&d, &w)) in x.data().iter().zip(references) {
        if xv >= sat {
            saturated += 1;
        } else if xv >= near {
            near_saturated += 1;
        }
        let denom = w - d;
        if denom >= epsilon {
            out.push((xv - d) / denom);
        } else {
            degenerate += 1;
            out.push(0.0);
        }
    }
    let total = n as f64;
    let (rows, cols, bands) = x.shape();
    Ok((
        RealCube::new(rows, cols, bands, out)?,
        CalibrationDiagnostics {
            saturated_fraction: saturated as f64 / total,
            near_saturated_fraction: near_saturated as f64 / total,
            degenerate_fraction: degenerate as f64 / total,
            epsilon,
        },
    ))
}

/// Calibrates a raw-counts cube into a reflectance cube, keeping the band
/// map and capture metadata of the measurement.
pub fn compute_reflectance(
    x: &HyperCube,
    refs: &ReferencePair,
    epsilon: f64,
) -> Result<(HyperCube, CalibrationDiagnostics), CalibError> {
    if x.domain() != Domain::RawCounts {
        return Err(CalibError::DomainMismatch(x.domain()));
    }
    let counts = match x.data() {
        CubeData::RawCounts(v) => v,
        CubeData::Reflectance(_) => unreachable!("domain checked above"),
    };
    let real = RealCube::new(
        x.rows(),
        x.cols(),
        x.bands(),
        counts.iter().map(|&c| c as f64).collect(),
    )?;
    let (r, diag) = compute_reflectance_real(&real, refs, epsilon)?;
    let data: Vec<f32> = r.data().iter().map(|&v| v as f32).collect();
    let cube = HyperCube::new(
        x.rows(),
        x.cols(),
        CubeData::Reflectance(data),
        x.band_map().clone(),
        x.meta().clone(),
    )?;
    Ok((cube, diag))
}

/// Checks a reference pair for dead bands and inverted cells before it is
/// trusted for a session.
pub fn validate_references(
    refs: &ReferencePair,
    epsilon: f64,
) -> Result<ReferenceReport, CalibError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(CalibError::NonPositiveEpsilon(epsilon));
    }
    let (rows, cols, bands) = refs.dark().shape();
    let pixels = rows * cols;
    let mut band_sum = vec![0.0f64; bands];
    let mut band_degenerate = vec![0usize; bands];
    let mut degenerate = 0usize;
    let mut not_above = 0usize;
    for px in 0..pixels {
        for k in 0..bands {
            let i = px * bands + k;
            let diff = refs.white().data()[i] - refs.dark().data()[i];
            band_sum[k] += diff;
            if diff < epsilon {
                degenerate += 1;
                band_degenerate[k] += 1;
            }
            if diff <= 0.0 {
                not_above += 1;
            }
        }
    }
    let per_band_mean_difference: Vec<f64> =
        band_sum.iter().map(|&s| s / pixels as f64).collect();
    let per_band_degenerate_fraction: Vec<f64> = band_degenerate
        .iter()
        .map(|&c| c as f64 / pixels as f64)
        .collect();
    let suspect_bands: Vec<usize> = per_band_degenerate_fraction
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > SUSPECT_BAND_FRACTION)
        .map(|(k, _)| k)
        .collect();
    let total = (pixels * bands) as f64;
    Ok(ReferenceReport {
        degenerate_fraction: degenerate as f64 / total,
        white_not_above_dark_fraction: not_above as f64 / total,
        per_band_mean_difference,
        per_band_degenerate_fraction,
        suspect_bands,
        epsilon,
    })
}
