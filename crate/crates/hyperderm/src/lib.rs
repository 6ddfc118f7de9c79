//! Snapshot hyperspectral dermoscopy toolkit.
//!
//! Everything needed to work with 51-channel skin reflectance cubes
//! (450-950 nm, ~10 nm spacing, 12-bit counts):
//!
//! - [`cube`]: the in-memory hypercube, the `HSC` on-disk format, band
//!   lookups, band montages, and field-of-view pixel density.
//! - [`calib`]: dark/white reference handling and flat-field reflectance
//!   calibration with saturation/degeneracy diagnostics.
//! - [`skinsim`]: a forward model of pigmented skin seen through the
//!   instrument (chromophore absorption, reduced scattering, semi-infinite
//!   reflectance, LED illumination, Gaussian band responses, shot/read
//!   noise) plus the inverse chromophore fit and synthetic cohorts.
//! - [`analysis`]: patch extraction at annotated points, per-group spectral
//!   aggregation, cohort stratification, class contrast, CSV export.
//! - [`plot`]: deterministic SVG line charts for group spectra.
//! - [`cli`]: the `simulate`, `calibrate`, `analyze`, `montage` and
//!   `dataset` commands used by the `hyperderm` binary.
//!
//! The `examples/` directory walks through each capability end to end;
//! start with `render_phantom` and `calibrate_cube`.

// Validation code writes `!(x > 0.0)` on purpose: unlike `x <= 0.0` it is
// also true for NaN, so one comparison rejects nonpositive and undefined.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calib;
pub mod cli;
pub mod cube;
mod fsio;
pub mod plot;
pub mod skinsim;

pub use cube::{BandMap, BodyPart, CaptureMeta, CubeData, Domain, HyperCube};
