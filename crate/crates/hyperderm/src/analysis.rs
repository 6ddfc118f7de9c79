//! Spectral analysis over annotated reflectance cubes.
//!
//! The unit of study is a point annotation: a pixel location in a
//! reflectance cube tagged with a class label and optional lesion
//! descriptors. This module extracts small patch-mean spectra at those
//! points, groups them by label, body part, patient, or lesion descriptor,
//! aggregates each group into a summary spectrum, and exports the result
//! as CSV. Annotated datasets live on disk as JSONL manifests, one record
//! per line, which keeps them diffable and appendable.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::{self, BandMap, BodyPart, CubeError, Domain, HyperCube};
use crate::fsio;
use crate::skinsim::scene::{DermoscopicPattern, Histology};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no input samples")]
    EmptyInput,
    #[error("samples carry different band maps")]
    BandMapMismatch,
    #[error("patch window must be odd, got {window}")]
    EvenWindow { window: usize },
    #[error(
        "a {window}x{window} patch at ({x}, {y}) does not fit a {cols}x{rows} image"
    )]
    WindowOutOfBounds {
        x: u32,
        y: u32,
        window: usize,
        rows: usize,
        cols: usize,
    },
    #[error("analysis requires reflectance cubes, got raw counts")]
    NotReflectance,
    #[error("manifest {path}: {source}")]
    ManifestIo {
        path: String,
        source: std::io::Error,
    },
    #[error("manifest line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// What the annotated pixel shows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    Skin,
    Lesion,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Skin => "skin",
            ClassLabel::Lesion => "lesion",
        })
    }
}

/// A labeled pixel. `x` indexes columns, `y` rows, both zero-based.
/// Pattern and histology describe the lesion the point sits on and are
/// meaningless (and flagged by validation) on skin points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointAnnotation {
    pub x: u32,
    pub y: u32,
    pub class_label: ClassLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<DermoscopicPattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histology: Option<Histology>,
}

impl PointAnnotation {
    pub fn skin(x: u32, y: u32) -> Self {
        Self {
            x,
            y,
            class_label: ClassLabel::Skin,
            pattern: None,
            histology: None,
        }
    }

    pub fn lesion(
        x: u32,
        y: u32,
        pattern: Option<DermoscopicPattern>,
        histology: Option<Histology>,
    ) -> Self {
        Self {
            x,
            y,
            class_label: ClassLabel::Lesion,
            pattern,
            histology,
        }
    }

    /// Consistency problems as human-readable strings, empty when clean.
    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.class_label == ClassLabel::Skin {
            if self.pattern.is_some() {
                out.push("skin point carries a dermoscopic pattern".into());
            }
            if self.histology.is_some() {
                out.push("skin point carries a histology".into());
            }
        }
        out
    }
}

/// One manifest line: a cube on disk plus a single annotated point in it.
/// `cube_path` is relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedRecord {
    pub cube_path: String,
    pub annotation: PointAnnotation,
    pub patient_id: String,
    pub body_part: BodyPart,
    /// Whether the imaged field contains a lesion at all, independent of
    /// which class this particular point samples.
    pub lesion_present: bool,
}

/// A single extracted spectrum with a note about where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    pub values: Vec<f64>,
    pub band_map: BandMap,
    pub provenance: String,
}

/// Mean spectrum over an odd `window` x `window` patch centered on the
/// annotation. The cube must hold reflectance and the whole patch must lie
/// inside the frame.
pub fn extract_patch_mean(
    cube: &HyperCube,
    ann: &PointAnnotation,
    window: usize,
) -> Result<SpectrumSample, AnalysisError> {
    if window.is_multiple_of(2) || window == 0 {
        return Err(AnalysisError::EvenWindow { window });
    }
    if cube.domain() != Domain::Reflectance {
        return Err(AnalysisError::NotReflectance);
    }
    let half = window / 2;
    let (x, y) = (ann.x as usize, ann.y as usize);
    let fits = x >= half && y >= half && x + half < cube.cols() && y + half < cube.rows();
    if !fits {
        return Err(AnalysisError::WindowOutOfBounds {
            x: ann.x,
            y: ann.y,
            window,
            rows: cube.rows(),
            cols: cube.cols(),
        });
    }
    let mut values = vec![0.0f64; cube.bands()];
    for r in (y - half)..=(y + half) {
        for c in (x - half)..=(x + half) {
            for (k, v) in values.iter_mut().enumerate() {
                *v += cube.value(r, c, k);
            }
        }
    }
    let count = (window * window) as f64;
    for v in values.iter_mut() {
        *v /= count;
    }
    Ok(SpectrumSample {
        values,
        band_map: cube.band_map().clone(),
        provenance: format!("{window}x{window} patch at ({}, {})", ann.x, ann.y),
    })
}

/// Summary statistic applied per band across a group of samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatKind {
    Mean,
    Median,
    /// Population standard deviation (divisor n).
    Std,
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatKind::Mean => "mean",
            StatKind::Median => "median",
            StatKind::Std => "std",
        })
    }
}

/// A per-band summary over `n` samples sharing one band map.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateSpectrum {
    pub values: Vec<f64>,
    pub n: usize,
    pub band_map: BandMap,
    pub stat: StatKind,
}

/// Collapses a group of samples into one spectrum. All samples must share
/// a band map. Median of an even count is the midpoint of the two central
/// values; standard deviation uses the population divisor.
pub fn aggregate(
    samples: &[SpectrumSample],
    stat: StatKind,
) -> Result<AggregateSpectrum, AnalysisError> {
    let first = samples.first().ok_or(AnalysisError::EmptyInput)?;
    if samples.iter().any(|s| s.band_map != first.band_map) {
        return Err(AnalysisError::BandMapMismatch);
    }
    if samples
        .iter()
        .any(|s| s.values.len() != first.band_map.channel_count())
    {
        return Err(AnalysisError::BandMapMismatch);
    }
    let bands = first.band_map.channel_count();
    let n = samples.len();
    let mut values = Vec::with_capacity(bands);
    let mut column = Vec::with_capacity(n);
    for k in 0..bands {
        column.clear();
        column.extend(samples.iter().map(|s| s.values[k]));
        let v = match stat {
            StatKind::Mean => column.iter().sum::<f64>() / n as f64,
            StatKind::Median => {
                column.sort_by(|a, b| a.partial_cmp(b).expect("spectra are finite"));
                if n % 2 == 1 {
                    column[n / 2]
                } else {
                    0.5 * (column[n / 2 - 1] + column[n / 2])
                }
            }
            StatKind::Std => {
                let mean = column.iter().sum::<f64>() / n as f64;
                let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
                var.sqrt()
            }
        };
        values.push(v);
    }
    Ok(AggregateSpectrum {
        values,
        n,
        band_map: first.band_map.clone(),
        stat,
    })
}

/// Field to group records by when slicing a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StratifyKey {
    ClassLabel,
    BodyPart,
    PatientId,
    Pattern,
    Histology,
}

impl StratifyKey {
    fn group_of(&self, record: &AnnotatedRecord) -> String {
        match self {
            StratifyKey::ClassLabel => record.annotation.class_label.to_string(),
            StratifyKey::BodyPart => record.body_part.to_string(),
            StratifyKey::PatientId => record.patient_id.clone(),
            StratifyKey::Pattern => match record.annotation.pattern {
                Some(p) => p.to_string(),
                None => "Unlabeled".into(),
            },
            StratifyKey::Histology => match record.annotation.histology {
                Some(h) => h.to_string(),
                None => "Unlabeled".into(),
            },
        }
    }
}

/// Default patch edge for spectrum extraction.
pub const DEFAULT_PATCH_WINDOW: usize = 3;

/// Loads every record's cube (caching by path, since manifests typically
/// reference far fewer cubes than records), extracts a patch-mean spectrum
/// at each annotation, and buckets the spectra by `key`. Group names map
/// to samples in manifest order; records missing an optional key land in
/// an "Unlabeled" group. `base_dir` anchors the manifest-relative cube
/// paths.
pub fn stratify(
    records: &[AnnotatedRecord],
    key: StratifyKey,
    base_dir: &Path,
    window: usize,
) -> Result<BTreeMap<String, Vec<SpectrumSample>>, AnalysisError> {
    let mut cache: HashMap<&str, HyperCube> = HashMap::new();
    let mut groups: BTreeMap<String, Vec<SpectrumSample>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let line = idx + 1;
        if !cache.contains_key(record.cube_path.as_str()) {
            let path = base_dir.join(&record.cube_path);
            let cube = cube::load_cube(&path).map_err(|e| match e {
                CubeError::Io { source, .. } => AnalysisError::ManifestIo {
                    path: path.display().to_string(),
                    source,
                },
                other => AnalysisError::Cube(other),
            })?;
            cache.insert(record.cube_path.as_str(), cube);
        }
        let cube = &cache[record.cube_path.as_str()];
        let mut sample =
            extract_patch_mean(cube, &record.annotation, window).map_err(|e| match e {
                AnalysisError::WindowOutOfBounds { .. }
                | AnalysisError::NotReflectance
                | AnalysisError::EvenWindow { .. } => AnalysisError::InvalidRecord {
                    line,
                    reason: e.to_string(),
                },
                other => other,
            })?;
        sample.provenance = format!("line {line}: {}", record.cube_path);
        groups.entry(key.group_of(record)).or_default().push(sample);
    }
    Ok(groups)
}

/// Per-band class difference and how much of it survives into the NIR.
#[derive(Clone, Debug, Serialize)]
pub struct ClassContrast {
    pub wavelengths_nm: Vec<f64>,
    /// Skin minus lesion, per band.
    pub difference: Vec<f64>,
    /// |difference at 950 nm| / |difference at 550 nm|. Zero when both
    /// bands show no contrast; infinite when only the 550 nm contrast
    /// vanishes.
    pub convergence_ratio: f64,
}

/// Wavelengths probed by the convergence ratio.
pub const CONTRAST_VISIBLE_NM: f64 = 550.0;
pub const CONTRAST_NIR_NM: f64 = 950.0;

/// Compares aggregate skin and lesion spectra on a shared band map.
pub fn class_contrast(
    skin: &AggregateSpectrum,
    lesion: &AggregateSpectrum,
) -> Result<ClassContrast, AnalysisError> {
    if skin.band_map != lesion.band_map {
        return Err(AnalysisError::BandMapMismatch);
    }
    let difference: Vec<f64> = skin
        .values
        .iter()
        .zip(&lesion.values)
        .map(|(s, l)| s - l)
        .collect();
    let vis = skin.band_map.nearest_band(CONTRAST_VISIBLE_NM).index;
    let nir = skin.band_map.nearest_band(CONTRAST_NIR_NM).index;
    let d_vis = difference[vis].abs();
    let d_nir = difference[nir].abs();
    let convergence_ratio = if d_nir == 0.0 {
        0.0
    } else if d_vis == 0.0 {
        f64::INFINITY
    } else {
        d_nir / d_vis
    };
    Ok(ClassContrast {
        wavelengths_nm: skin.band_map.centers().iter().map(|&c| c as f64).collect(),
        difference,
        convergence_ratio,
    })
}

/// A named aggregate ready for export.
#[derive(Clone, Debug)]
pub struct GroupSpectrum {
    pub group: String,
    pub aggregate: AggregateSpectrum,
}

/// Renders group spectra as long-form CSV with the header
/// `wavelength_nm,group,stat,value,n`. Rows are sorted by group then
/// wavelength, values printed with six decimals, so identical inputs
/// produce identical bytes.
pub fn export_csv(groups: &[GroupSpectrum]) -> String {
    let mut ordered: Vec<&GroupSpectrum> = groups.iter().collect();
    ordered.sort_by(|a, b| a.group.cmp(&b.group));
    let mut out = String::from("wavelength_nm,group,stat,value,n\n");
    for g in ordered {
        for (k, v) in g.aggregate.values.iter().enumerate() {
            let nm = g.aggregate.band_map.centers()[k];
            out.push_str(&format!(
                "{nm},{group},{stat},{v:.6},{n}\n",
                group = g.group,
                stat = g.aggregate.stat,
                n = g.aggregate.n,
            ));
        }
    }
    out
}

/// Reads a JSONL manifest: one `AnnotatedRecord` per non-empty line.
/// Parse failures name the offending 1-based line.
pub fn load_manifest(path: &Path) -> Result<Vec<AnnotatedRecord>, AnalysisError> {
    let text = std::fs::read_to_string(path).map_err(|source| AnalysisError::ManifestIo {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let record: AnnotatedRecord =
            serde_json::from_str(line).map_err(|e| AnalysisError::InvalidRecord {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records as JSONL, atomically, one compact JSON object per line.
pub fn save_manifest(path: &Path, records: &[AnnotatedRecord]) -> Result<(), AnalysisError> {
    let mut text = String::new();
    for record in records {
        text.push_str(&serde_json::to_string(record).expect("records serialize"));
        text.push('\n');
    }
    fsio::write_atomic(path, text.as_bytes()).map_err(|source| AnalysisError::ManifestIo {
        path: path.display().to_string(),
        source,
    })
}

/// Totals and consistency problems for a loaded manifest.
#[derive(Clone, Debug, Serialize)]
pub struct ManifestReport {
    pub total: usize,
    pub lesion_present_count: usize,
    pub skin_points: usize,
    pub lesion_points: usize,
    /// Each entry names its 1-based line.
    pub problems: Vec<String>,
}

impl ManifestReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks record-level invariants without touching the cubes: lesion
/// points require `lesion_present`, skin points must not carry lesion
/// descriptors, and identifiers must be non-empty.
pub fn validate_manifest(records: &[AnnotatedRecord]) -> ManifestReport {
    let mut problems = Vec::new();
    let mut lesion_present_count = 0;
    let mut skin_points = 0;
    let mut lesion_points = 0;
    for (idx, record) in records.iter().enumerate() {
        let line = idx + 1;
        if record.lesion_present {
            lesion_present_count += 1;
        }
        match record.annotation.class_label {
            ClassLabel::Skin => skin_points += 1,
            ClassLabel::Lesion => lesion_points += 1,
        }
        if record.annotation.class_label == ClassLabel::Lesion && !record.lesion_present {
            problems.push(format!(
                "line {line}: lesion point in a record marked lesion-free"
            ));
        }
        for p in record.annotation.problems() {
            problems.push(format!("line {line}: {p}"));
        }
        if record.patient_id.trim().is_empty() {
            problems.push(format!("line {line}: empty patient_id"));
        }
        if record.cube_path.trim().is_empty() {
            problems.push(format!("line {line}: empty cube_path"));
        }
    }
    ManifestReport {
        total: records.len(),
        lesion_present_count,
        skin_points,
        lesion_points,
        problems,
    }
}
