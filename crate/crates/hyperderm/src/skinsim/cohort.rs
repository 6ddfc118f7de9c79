//! Synthetic study cohorts: rendered, calibrated, annotated, manifested.
//!
//! Two builders. [`build_cohort`] lays down the bread-and-butter dataset
//! shape used for class-contrast work: a configurable number of patients,
//! each contributing one lesion capture and one lesion-free capture, with
//! annotation records cycling over the patients until the requested record
//! and class counts are met. [`build_pattern_panel`] renders one capture
//! per entry of a small dermoscopic pattern panel, with distinct scene
//! geometry per pattern (yolk-in-disc for the fried egg, ring for the
//! peripheral network, satellite dots for globular).
//!
//! Records reference far fewer cubes than they count: many annotations
//! share one capture, which is also how real reading sessions look.

use std::path::{Path, PathBuf};

use crate::analysis::{save_manifest, AnnotatedRecord, PointAnnotation};
use crate::calib::{compute_reflectance, DEFAULT_EPSILON};
use crate::cube::{save_cube, BodyPart, HyperCube};

use super::render::{render_references, render_scene, RenderConfig};
use super::scene::{DermoscopicPattern, Histology, Lesion, LesionShape, PhantomScene};
use super::optics::SkinOpticsParams;
use super::SimError;

const BODY_PARTS: [BodyPart; 8] = [
    BodyPart::Arms,
    BodyPart::Legs,
    BodyPart::Face,
    BodyPart::Neck,
    BodyPart::Hands,
    BodyPart::Torso,
    BodyPart::Abdomen,
    BodyPart::Other,
];

/// Shape of a cohort to synthesize.
#[derive(Clone, Copy, Debug)]
pub struct CohortPlan {
    pub patients: usize,
    /// Total annotation records in the manifest.
    pub records: usize,
    /// How many of those records annotate lesion tissue; the rest sample
    /// normal skin in lesion-free captures.
    pub lesion_records: usize,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    /// Render with sensor noise. Off, captures are exact forward-model
    /// counts, which is what contrast and convergence checks want.
    pub noise: bool,
    /// Frames averaged into each calibration reference.
    pub reference_frames: u32,
    /// Per-patient melanin increment, so patients are distinguishable.
    /// Zero collapses all patients onto the same optics.
    pub patient_melanin_step: f64,
}

impl CohortPlan {
    /// The collected dataset's shape: 15 patients, 160 records, 91 of
    /// them lesion annotations.
    pub fn standard() -> Self {
        Self {
            patients: 15,
            records: 160,
            lesion_records: 91,
            rows: 32,
            cols: 32,
            seed: 0,
            noise: false,
            reference_frames: 16,
            patient_melanin_step: 0.004,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.patients == 0 || self.records == 0 {
            return Err(SimError::Cohort(
                "a cohort needs at least one patient and one record".into(),
            ));
        }
        if self.lesion_records > self.records {
            return Err(SimError::Cohort(format!(
                "{} lesion records exceed {} total records",
                self.lesion_records, self.records
            )));
        }
        if self.rows < 16 || self.cols < 16 {
            return Err(SimError::Cohort(
                "frames below 16x16 leave no room for a lesion and a skin patch".into(),
            ));
        }
        if !self.patient_melanin_step.is_finite() || self.patient_melanin_step < 0.0 {
            return Err(SimError::Cohort("melanin step must be >= 0".into()));
        }
        Ok(())
    }

    fn skin_params(&self, patient: usize) -> SkinOpticsParams {
        let mut p = SkinOpticsParams::typical_skin();
        p.melanin_fraction += patient as f64 * self.patient_melanin_step;
        p
    }

    fn lesion_params(&self, patient: usize) -> SkinOpticsParams {
        let mut p = SkinOpticsParams::typical_lesion();
        p.melanin_fraction += patient as f64 * self.patient_melanin_step;
        p
    }
}

/// A cohort on disk: where its manifest landed, the records inside it,
/// and how many cube files back them.
#[derive(Clone, Debug)]
pub struct BuiltCohort {
    pub manifest_path: PathBuf,
    pub records: Vec<AnnotatedRecord>,
    pub cube_files: usize,
}

fn patient_id(i: usize) -> String {
    format!("P{:03}", i + 1)
}

/// Renders a scene, renders matching references, calibrates, and writes
/// the reflectance cube. The heavy lifting all lives elsewhere; this is
/// the one-capture pipeline.
fn write_calibrated_capture(
    scene: &PhantomScene,
    cfg: &RenderConfig,
    frames: u32,
    path: &Path,
) -> Result<HyperCube, SimError> {
    let rendered = render_scene(scene, cfg)?;
    let refs = render_references(scene.rows, scene.cols, cfg, frames)?;
    let (reflectance, _) = compute_reflectance(&rendered.cube, &refs, DEFAULT_EPSILON)?;
    save_cube(&reflectance, path)?;
    Ok(reflectance)
}

fn ensure_cubes_dir(out_dir: &Path) -> Result<PathBuf, SimError> {
    let cubes = out_dir.join("cubes");
    std::fs::create_dir_all(&cubes)
        .map_err(|e| SimError::Cohort(format!("create {}: {e}", cubes.display())))?;
    Ok(cubes)
}

/// Builds the full cohort under `out_dir`: `cubes/` with one reflectance
/// capture per patient and class, and `manifest.jsonl` listing the
/// annotation records. Deterministic for a fixed plan.
pub fn build_cohort(plan: &CohortPlan, out_dir: &Path) -> Result<BuiltCohort, SimError> {
    plan.validate()?;
    ensure_cubes_dir(out_dir)?;

    let mut cfg = if plan.noise {
        RenderConfig::standard()
    } else {
        RenderConfig::noiseless()
    };

    // One lesion capture and one skin capture per patient.
    let mut lesion_paths = Vec::with_capacity(plan.patients);
    let mut skin_paths = Vec::with_capacity(plan.patients);
    let mut cube_parts = Vec::with_capacity(2 * plan.patients);
    for i in 0..plan.patients {
        let base_radius = (plan.rows.min(plan.cols) as f64) / 4.0;
        let lesion_scene = PhantomScene {
            rows: plan.rows,
            cols: plan.cols,
            background: plan.skin_params(i),
            lesions: vec![Lesion {
                center_px: (plan.cols as f64 / 2.0, plan.rows as f64 / 2.0),
                shape: LesionShape::Disc {
                    radius_px: base_radius,
                },
                params: plan.lesion_params(i),
                pattern: DermoscopicPattern::HomogeneousBrown,
                histology: HISTOLOGY_CYCLE[i % HISTOLOGY_CYCLE.len()],
            }],
        };
        let skin_scene = PhantomScene::uniform(plan.rows, plan.cols, plan.skin_params(i));

        for (class, scene) in [("lesion", &lesion_scene), ("skin", &skin_scene)] {
            let cube_index = cube_parts.len();
            cfg.seed = plan.seed.wrapping_add(1000 * cube_index as u64);
            cfg.meta.patient_id = patient_id(i);
            cfg.meta.body_part = BODY_PARTS[cube_index % BODY_PARTS.len()];
            let rel = format!("cubes/p{i:02}_{class}.hsc");
            write_calibrated_capture(
                scene,
                &cfg,
                plan.reference_frames,
                &out_dir.join(&rel),
            )?;
            cube_parts.push(cfg.meta.body_part);
            if class == "lesion" {
                lesion_paths.push(rel);
            } else {
                skin_paths.push(rel);
            }
        }
    }

    // Annotation points. Lesion points jitter around the disc center in a
    // small deterministic cycle so repeated records on one capture still
    // sample different patches; skin points do the same near a corner.
    let cx = plan.cols as i64 / 2;
    let cy = plan.rows as i64 / 2;
    let jitter: [(i64, i64); 5] = [(0, 0), (2, 1), (-2, -1), (1, -2), (-1, 2)];
    let mut records = Vec::with_capacity(plan.records);
    for r in 0..plan.records {
        let i = r % plan.patients;
        let (dx, dy) = jitter[r % jitter.len()];
        if r < plan.lesion_records {
            let histology = HISTOLOGY_CYCLE[i % HISTOLOGY_CYCLE.len()];
            records.push(AnnotatedRecord {
                cube_path: lesion_paths[i].clone(),
                annotation: PointAnnotation::lesion(
                    (cx + dx) as u32,
                    (cy + dy) as u32,
                    Some(DermoscopicPattern::HomogeneousBrown),
                    Some(histology),
                ),
                patient_id: patient_id(i),
                body_part: cube_parts[2 * i],
                lesion_present: true,
            });
        } else {
            records.push(AnnotatedRecord {
                cube_path: skin_paths[i].clone(),
                annotation: PointAnnotation::skin((2 + dx.max(0)) as u32, (2 + dy.max(0)) as u32),
                patient_id: patient_id(i),
                body_part: cube_parts[2 * i + 1],
                lesion_present: false,
            });
        }
    }

    let manifest_path = out_dir.join("manifest.jsonl");
    save_manifest(&manifest_path, &records)
        .map_err(|e| SimError::Cohort(format!("write manifest: {e}")))?;
    Ok(BuiltCohort {
        manifest_path,
        records,
        cube_files: 2 * plan.patients,
    })
}

const HISTOLOGY_CYCLE: [Histology; 3] = [
    Histology::Junctional,
    Histology::Compound,
    Histology::Dermal,
];

/// The nine-lesion reading panel: dermoscopic pattern with the histology
/// each case showed. Three diffuse reticular and three homogeneous brown
/// cases, one each of the rest; five junctional, two compound, two dermal.
pub fn pattern_panel() -> [(DermoscopicPattern, Histology); 9] {
    use DermoscopicPattern::*;
    use Histology::*;
    [
        (FriedEgg, Compound),
        (PeripheralNetwork, Junctional),
        (DiffuseReticular, Junctional),
        (Globular, Compound),
        (DiffuseReticular, Junctional),
        (HomogeneousBrown, Junctional),
        (HomogeneousBrown, Dermal),
        (HomogeneousBrown, Dermal),
        (DiffuseReticular, Junctional),
    ]
}

/// Scene and annotation point for one panel entry. `variant` counts how
/// many earlier panel entries shared the pattern, nudging repeat cases
/// apart optically.
fn panel_scene(
    pattern: DermoscopicPattern,
    histology: Histology,
    variant: usize,
    rows: usize,
    cols: usize,
) -> (PhantomScene, (u32, u32)) {
    let cx = cols as f64 / 2.0;
    let cy = rows as f64 / 2.0;
    let r = (rows.min(cols) as f64) / 4.0;
    let melanin = |m: f64| SkinOpticsParams {
        melanin_fraction: m,
        blood_fraction: 0.05,
        ..SkinOpticsParams::typical_skin()
    };
    let lesion = |shape: LesionShape, m: f64| Lesion {
        center_px: (cx, cy),
        shape,
        params: melanin(m),
        pattern,
        histology,
    };
    let center = (cx as u32, cy as u32);
    let mut scene = PhantomScene::uniform(rows, cols, SkinOpticsParams::typical_skin());
    let point = match pattern {
        DermoscopicPattern::FriedEgg => {
            scene.lesions = vec![
                lesion(LesionShape::Disc { radius_px: r }, 0.12),
                lesion(LesionShape::Disc { radius_px: r / 2.0 }, 0.24),
            ];
            center
        }
        DermoscopicPattern::PeripheralNetwork => {
            scene.lesions = vec![
                lesion(
                    LesionShape::Annulus {
                        inner_px: 0.6 * r,
                        outer_px: r,
                    },
                    0.22,
                ),
                lesion(LesionShape::Disc { radius_px: 0.6 * r }, 0.08),
            ];
            // Annotate on the pigmented ring, not the pale center.
            ((cx + 0.8 * r) as u32, cy as u32)
        }
        DermoscopicPattern::Globular => {
            let dot = 0.22 * r;
            let mut dots = vec![lesion(LesionShape::Disc { radius_px: r }, 0.12)];
            for (gx, gy) in [(-0.4, -0.35), (0.45, -0.2), (-0.05, 0.45)] {
                dots.push(Lesion {
                    center_px: (cx + gx * r, cy + gy * r),
                    shape: LesionShape::Disc { radius_px: dot },
                    params: melanin(0.3),
                    pattern,
                    histology,
                });
            }
            scene.lesions = dots;
            ((cx - 0.4 * r) as u32, (cy - 0.35 * r) as u32)
        }
        DermoscopicPattern::DiffuseReticular => {
            scene.lesions = vec![lesion(
                LesionShape::Disc { radius_px: r },
                0.16 + 0.02 * variant as f64,
            )];
            center
        }
        DermoscopicPattern::HomogeneousBrown => {
            scene.lesions = vec![lesion(
                LesionShape::Disc { radius_px: r },
                0.18 + 0.02 * variant as f64,
            )];
            center
        }
    };
    (scene, point)
}

/// Renders the nine-pattern panel under `out_dir` (own cubes, own
/// manifest) and returns its records. Each case gets a distinct patient.
pub fn build_pattern_panel(out_dir: &Path, seed: u64) -> Result<BuiltCohort, SimError> {
    ensure_cubes_dir(out_dir)?;
    let rows = 32;
    let cols = 32;
    let mut cfg = RenderConfig::noiseless();
    let mut records = Vec::with_capacity(9);
    let mut seen = std::collections::HashMap::new();
    for (case, (pattern, histology)) in pattern_panel().into_iter().enumerate() {
        let variant = *seen
            .entry(pattern)
            .and_modify(|v| *v += 1)
            .or_insert(0usize);
        let (scene, (px, py)) = panel_scene(pattern, histology, variant, rows, cols);
        cfg.seed = seed.wrapping_add(case as u64);
        cfg.meta.patient_id = format!("P{:03}", 101 + case);
        cfg.meta.body_part = BODY_PARTS[case % BODY_PARTS.len()];
        let rel = format!("cubes/panel_{case:02}_{pattern:?}.hsc").to_lowercase();
        write_calibrated_capture(&scene, &cfg, 1, &out_dir.join(&rel))?;
        records.push(AnnotatedRecord {
            cube_path: rel,
            annotation: PointAnnotation::lesion(px, py, Some(pattern), Some(histology)),
            patient_id: cfg.meta.patient_id.clone(),
            body_part: cfg.meta.body_part,
            lesion_present: true,
        });
    }
    let manifest_path = out_dir.join("manifest.jsonl");
    save_manifest(&manifest_path, &records)
        .map_err(|e| SimError::Cohort(format!("write manifest: {e}")))?;
    Ok(BuiltCohort {
        manifest_path,
        records,
        cube_files: 9,
    })
}
