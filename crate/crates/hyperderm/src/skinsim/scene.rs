//! Phantom scenes: a background skin parameter set with labeled disc or
//! annulus lesions painted over it.
//!
//! Scenes serialize to a small JSON document (see `PhantomScene::to_json`)
//! so the command line and tests can describe them declaratively:
//!
//! ```json
//! {
//!   "rows": 64, "cols": 64,
//!   "background": { "melanin_fraction": 0.02, ... },
//!   "lesions": [ {
//!     "center_px": [32.0, 32.0],
//!     "shape": { "Disc": { "radius_px": 14.0 } },
//!     "params": { "melanin_fraction": 0.2, ... },
//!     "pattern": "HomogeneousBrown",
//!     "histology": "Junctional"
//!   } ]
//! }
//! ```

use super::optics::SkinOpticsParams;
use super::SimError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Footprint of a lesion around its center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LesionShape {
    Disc { radius_px: f64 },
    Annulus { inner_px: f64, outer_px: f64 },
}

impl LesionShape {
    fn outer_radius(&self) -> f64 {
        match *self {
            LesionShape::Disc { radius_px } => radius_px,
            LesionShape::Annulus { outer_px, .. } => outer_px,
        }
    }

    fn contains(&self, dist: f64) -> bool {
        match *self {
            LesionShape::Disc { radius_px } => dist <= radius_px,
            LesionShape::Annulus { inner_px, outer_px } => dist >= inner_px && dist <= outer_px,
        }
    }
}

/// Dermoscopic pattern of a nevus. `PeripheralNetwork` abbreviates
/// "peripheral network with central hypopigmentation".
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum DermoscopicPattern {
    DiffuseReticular,
    PeripheralNetwork,
    Globular,
    FriedEgg,
    HomogeneousBrown,
}

impl fmt::Display for DermoscopicPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Histologic nevus type by skin layer involvement.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Histology {
    Junctional,
    Compound,
    Dermal,
}

impl fmt::Display for Histology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One labeled lesion. `center_px` is (x, y) = (column, row), fractional
/// coordinates allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lesion {
    pub center_px: (f64, f64),
    pub shape: LesionShape,
    pub params: SkinOpticsParams,
    pub pattern: DermoscopicPattern,
    pub histology: Histology,
}

/// A renderable phantom: background skin plus lesions, painted in list
/// order, so a later lesion overdraws an earlier one where they overlap
/// (which is how composite patterns like the fried egg are built).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomScene {
    pub rows: usize,
    pub cols: usize,
    pub background: SkinOpticsParams,
    pub lesions: Vec<Lesion>,
}

impl PhantomScene {
    /// Uniform scene with no lesions.
    pub fn uniform(rows: usize, cols: usize, params: SkinOpticsParams) -> Self {
        Self {
            rows,
            cols,
            background: params,
            lesions: Vec::new(),
        }
    }

    /// One homogeneous lesion disc centered in the frame; the standard
    /// demo and test scene.
    pub fn demo(rows: usize, cols: usize) -> Self {
        let radius = (rows.min(cols) as f64) / 4.0;
        Self {
            rows,
            cols,
            background: SkinOpticsParams::typical_skin(),
            lesions: vec![Lesion {
                center_px: (cols as f64 / 2.0, rows as f64 / 2.0),
                shape: LesionShape::Disc { radius_px: radius },
                params: SkinOpticsParams::typical_lesion(),
                pattern: DermoscopicPattern::HomogeneousBrown,
                histology: Histology::Junctional,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(SimError::InvalidParams("scene has empty frame".into()));
        }
        self.background.validate()?;
        for (i, lesion) in self.lesions.iter().enumerate() {
            lesion.params.validate()?;
            let (cx, cy) = lesion.center_px;
            if !cx.is_finite() || !cy.is_finite() {
                return Err(SimError::InvalidParams(format!(
                    "lesion {i} center is not finite"
                )));
            }
            match lesion.shape {
                LesionShape::Disc { radius_px } => {
                    if !(radius_px.is_finite() && radius_px > 0.0) {
                        return Err(SimError::InvalidParams(format!(
                            "lesion {i} radius {radius_px} must be positive"
                        )));
                    }
                }
                LesionShape::Annulus { inner_px, outer_px } => {
                    if !(inner_px.is_finite() && outer_px.is_finite())
                        || inner_px <= 0.0
                        || outer_px <= inner_px
                    {
                        return Err(SimError::InvalidParams(format!(
                            "lesion {i} annulus radii ({inner_px}, {outer_px}) must satisfy 0 < inner < outer"
                        )));
                    }
                }
            }
            let r = lesion.shape.outer_radius();
            let max_x = (self.cols - 1) as f64;
            let max_y = (self.rows - 1) as f64;
            if cx - r < 0.0 || cx + r > max_x || cy - r < 0.0 || cy + r > max_y {
                return Err(SimError::GeometryOutOfFrame(format!(
                    "lesion {i} spans x {:.1}..{:.1}, y {:.1}..{:.1} in a {}x{} frame",
                    cx - r,
                    cx + r,
                    cy - r,
                    cy + r,
                    self.cols,
                    self.rows
                )));
            }
        }
        Ok(())
    }

    /// Region index of a pixel: 0 for background, i+1 for lesion i. The
    /// topmost (last-listed) covering lesion wins.
    pub fn region_index(&self, row: usize, col: usize) -> usize {
        let x = col as f64;
        let y = row as f64;
        for (i, lesion) in self.lesions.iter().enumerate().rev() {
            let dist = (x - lesion.center_px.0).hypot(y - lesion.center_px.1);
            if lesion.shape.contains(dist) {
                return i + 1;
            }
        }
        0
    }

    /// Parameter sets indexed by region: `[background, lesion 0, ...]`.
    pub fn region_params(&self) -> Vec<&SkinOpticsParams> {
        std::iter::once(&self.background)
            .chain(self.lesions.iter().map(|l| &l.params))
            .collect()
    }

    pub fn params_at(&self, row: usize, col: usize) -> &SkinOpticsParams {
        let region = self.region_index(row, col);
        if region == 0 {
            &self.background
        } else {
            &self.lesions[region - 1].params
        }
    }

    /// Lesion-vs-skin mask, row-major: 255 under any lesion, 0 elsewhere.
    pub fn class_mask(&self) -> Vec<u8> {
        let mut mask = vec![0u8; self.rows * self.cols];
        for row in 0..self.rows {
            for col in 0..self.cols {
                if self.region_index(row, col) != 0 {
                    mask[row * self.cols + col] = 255;
                }
            }
        }
        mask
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let scene: PhantomScene = serde_json::from_str(text)
            .map_err(|e| SimError::InvalidParams(format!("scene JSON: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_scene_is_valid_and_masks_one_disc() {
        let scene = PhantomScene::demo(64, 64);
        scene.validate().unwrap();
        let mask = scene.class_mask();
        let lesion_px = mask.iter().filter(|&&m| m == 255).count();
        // Disc radius 16 in a 64x64 frame: roughly pi * 256 pixels.
        assert!(
            (700..900).contains(&lesion_px),
            "unexpected lesion area {lesion_px}"
        );
        assert_eq!(scene.region_index(32, 32), 1);
        assert_eq!(scene.region_index(0, 0), 0);
        assert_eq!(
            scene.params_at(32, 32).melanin_fraction,
            SkinOpticsParams::typical_lesion().melanin_fraction
        );
    }

    #[test]
    fn annulus_excludes_its_hole() {
        let mut scene = PhantomScene::uniform(41, 41, SkinOpticsParams::typical_skin());
        scene.lesions.push(Lesion {
            center_px: (20.0, 20.0),
            shape: LesionShape::Annulus {
                inner_px: 5.0,
                outer_px: 10.0,
            },
            params: SkinOpticsParams::typical_lesion(),
            pattern: DermoscopicPattern::PeripheralNetwork,
            histology: Histology::Junctional,
        });
        scene.validate().unwrap();
        assert_eq!(scene.region_index(20, 20), 0, "hole is background");
        assert_eq!(scene.region_index(20, 28), 1, "ring is lesion");
        assert_eq!(scene.region_index(20, 34), 0, "outside is background");
    }

    #[test]
    fn later_lesions_overdraw_earlier_ones() {
        let mut scene = PhantomScene::uniform(41, 41, SkinOpticsParams::typical_skin());
        let mut inner = SkinOpticsParams::typical_lesion();
        inner.melanin_fraction = 0.3;
        scene.lesions.push(Lesion {
            center_px: (20.0, 20.0),
            shape: LesionShape::Disc { radius_px: 12.0 },
            params: SkinOpticsParams::typical_lesion(),
            pattern: DermoscopicPattern::FriedEgg,
            histology: Histology::Compound,
        });
        scene.lesions.push(Lesion {
            center_px: (20.0, 20.0),
            shape: LesionShape::Disc { radius_px: 5.0 },
            params: inner,
            pattern: DermoscopicPattern::FriedEgg,
            histology: Histology::Compound,
        });
        assert_eq!(scene.region_index(20, 20), 2, "yolk on top");
        assert_eq!(scene.region_index(20, 28), 1, "white of the egg below");
    }

    #[test]
    fn geometry_must_stay_inside_the_frame() {
        let mut scene = PhantomScene::demo(64, 64);
        scene.lesions[0].center_px = (60.0, 32.0);
        assert!(matches!(
            scene.validate(),
            Err(SimError::GeometryOutOfFrame(_))
        ));
        let mut bad_annulus = PhantomScene::uniform(64, 64, SkinOpticsParams::typical_skin());
        bad_annulus.lesions.push(Lesion {
            center_px: (32.0, 32.0),
            shape: LesionShape::Annulus {
                inner_px: 8.0,
                outer_px: 8.0,
            },
            params: SkinOpticsParams::typical_lesion(),
            pattern: DermoscopicPattern::Globular,
            histology: Histology::Dermal,
        });
        assert!(bad_annulus.validate().is_err(), "inner must be < outer");
    }

    #[test]
    fn scene_json_round_trips() {
        let scene = PhantomScene::demo(48, 56);
        let text = scene.to_json();
        let back = PhantomScene::from_json(&text).unwrap();
        assert_eq!(back, scene);
        assert!(PhantomScene::from_json("{\"rows\": 0}").is_err());
    }
}
