//! Forward model of pigmented skin as seen by the instrument, plus the
//! inverse chromophore fit and synthetic cohort builders.
//!
//! The pipeline, in the order light travels:
//!
//! 1. [`chromophores`]: absorption tables for oxy/deoxy-hemoglobin and
//!    water, and the melanin power law, on a 2 nm grid over 400-1000 nm.
//! 2. [`optics`]: total absorption and reduced scattering for a parameter
//!    set, and the semi-infinite diffuse reflectance closing the model.
//! 3. [`sensor`]: LED illumination, quantum efficiency, Gaussian band
//!    responses, gain and noise figures.
//! 4. [`scene`]: phantom scenes (background skin plus disc/annulus lesions
//!    with dermoscopic pattern and histology labels).
//! 5. [`render`]: quadrature of spectrum x illumination x response into
//!    counts, per-pixel seeded noise, and band-averaged ground truth.
//! 6. [`fit`]: bounded derivative-free least squares recovering parameters
//!    from a measured band spectrum.
//! 7. [`cohort`]: rendered cohorts and manifests that mirror the collected
//!    dataset's shape (patients, class balance, pattern panel).

pub mod chromophores;
pub mod cohort;
pub mod fit;
pub mod optics;
pub mod render;
pub mod scene;
pub mod sensor;

pub use chromophores::ChromophoreTables;
pub use cohort::{build_cohort, build_pattern_panel, pattern_panel, BuiltCohort, CohortPlan};
pub use fit::{fit_chromophores, FitBounds, FitResult};
pub use optics::{
    diffuse_reflectance, reduced_scattering, skin_spectrum, total_absorption, SkinOpticsParams,
};
pub use render::{render_dark, render_references, render_scene, BandIntegrator, RenderConfig};
pub use scene::{DermoscopicPattern, Histology, Lesion, LesionShape, PhantomScene};
pub use sensor::{IlluminationModel, SensorModel};

use crate::calib::CalibError;
use crate::cube::{BandMapError, CubeError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("wavelength {nm} nm outside the modeled 400-1000 nm range")]
    WavelengthOutOfRange { nm: f64 },
    #[error("reduced scattering must be positive, got {musp}")]
    NonPositiveScattering { musp: f64 },
    #[error("absorption must be nonnegative, got {mua}")]
    NegativeAbsorption { mua: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("lesion geometry leaves the frame: {0}")]
    GeometryOutOfFrame(String),
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
    #[error("lower bound exceeds upper bound for {field}")]
    BoundsInverted { field: &'static str },
    #[error("need at least 10 bands to fit, got {found}")]
    TooFewBands { found: usize },
    #[error("spectrum has {found} bands, model expects {expected}")]
    BandCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    BandMap(#[from] BandMapError),
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Calib(#[from] CalibError),
    #[error("analysis step failed during cohort build: {0}")]
    Cohort(String),
}
