//! Spectral band grid: per-channel center wavelengths and bandwidths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Channels in the stock acquisition grid.
pub const DEFAULT_CHANNEL_COUNT: usize = 51;
/// First center wavelength of the stock grid, nm.
pub const GRID_START_NM: f32 = 450.0;
/// Center-to-center spacing of the stock grid, nm.
pub const GRID_STEP_NM: f32 = 10.0;
/// Lowest center wavelength a band map may carry, nm.
pub const WAVELENGTH_MIN_NM: f32 = 400.0;
/// Highest center wavelength a band map may carry, nm.
pub const WAVELENGTH_MAX_NM: f32 = 1000.0;
/// Stock bandwidth at the blue end of the grid, nm FWHM.
pub const FWHM_AT_450_NM: f32 = 8.0;
/// Stock bandwidth at the red end of the grid, nm FWHM.
pub const FWHM_AT_950_NM: f32 = 25.0;

#[derive(Debug, Error, PartialEq)]
pub enum BandMapError {
    #[error("band map needs at least one channel")]
    Empty,
    #[error("centers and fwhm lengths differ: {centers} vs {fwhm}")]
    LengthMismatch { centers: usize, fwhm: usize },
    #[error("centers must be strictly increasing (violated at channel {0})")]
    NotIncreasing(usize),
    #[error("center {0} nm outside the supported 400..1000 nm range")]
    CenterOutOfRange(f32),
    #[error("fwhm must be positive and finite (channel {0})")]
    NonPositiveFwhm(usize),
    #[error("channel index {index} out of range for {count} channels")]
    IndexOutOfRange { index: usize, count: usize },
}

/// Result of snapping a requested wavelength onto the grid.
///
/// `out_of_range` is raised when the request lies beyond the first or last
/// center by more than half the adjacent grid step; the index still points
/// at the nearest (clamped) channel so callers can proceed after logging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandLookup {
    pub index: usize,
    pub out_of_range: bool,
}

/// Center wavelength and FWHM for every channel of a cube.
///
/// Centers are strictly increasing and live in 400..1000 nm. Values are kept
/// in `f32` to match the on-disk representation exactly, so a map survives a
/// save/load round trip bit for bit; wavelength math upcasts to `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandMap {
    centers: Vec<f32>,
    fwhm: Vec<f32>,
}

impl BandMap {
    pub fn new(centers: Vec<f32>, fwhm: Vec<f32>) -> Result<Self, BandMapError> {
        if centers.is_empty() {
            return Err(BandMapError::Empty);
        }
        if centers.len() != fwhm.len() {
            return Err(BandMapError::LengthMismatch {
                centers: centers.len(),
                fwhm: fwhm.len(),
            });
        }
        for (k, &c) in centers.iter().enumerate() {
            if !c.is_finite() || !(WAVELENGTH_MIN_NM..=WAVELENGTH_MAX_NM).contains(&c) {
                return Err(BandMapError::CenterOutOfRange(c));
            }
            if k > 0 && centers[k - 1] >= c {
                return Err(BandMapError::NotIncreasing(k));
            }
        }
        for (k, &w) in fwhm.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(BandMapError::NonPositiveFwhm(k));
            }
        }
        Ok(Self { centers, fwhm })
    }

    /// The stock 51-channel grid: centers 450 + 10k nm for k = 0..=50,
    /// bandwidth growing linearly from 8 nm FWHM at 450 to 25 nm at 950.
    pub fn default_grid() -> Self {
        let n = DEFAULT_CHANNEL_COUNT;
        let centers: Vec<f32> = (0..n)
            .map(|k| GRID_START_NM + GRID_STEP_NM * k as f32)
            .collect();
        let span = FWHM_AT_950_NM - FWHM_AT_450_NM;
        let fwhm: Vec<f32> = (0..n)
            .map(|k| FWHM_AT_450_NM + span * k as f32 / (n - 1) as f32)
            .collect();
        Self::new(centers, fwhm).expect("stock grid is valid")
    }

    pub fn channel_count(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[f32] {
        &self.centers
    }

    pub fn fwhm(&self) -> &[f32] {
        &self.fwhm
    }

    /// Center wavelength of channel `k` in nm.
    pub fn center(&self, k: usize) -> Result<f64, BandMapError> {
        self.centers
            .get(k)
            .map(|&c| c as f64)
            .ok_or(BandMapError::IndexOutOfRange {
                index: k,
                count: self.centers.len(),
            })
    }

    /// FWHM of channel `k` in nm.
    pub fn fwhm_at(&self, k: usize) -> Result<f64, BandMapError> {
        self.fwhm
            .get(k)
            .map(|&w| w as f64)
            .ok_or(BandMapError::IndexOutOfRange {
                index: k,
                count: self.fwhm.len(),
            })
    }

    /// Channel whose center is nearest `nm`; ties break toward the lower
    /// index. Requests beyond either end clamp to the end channel, and the
    /// `out_of_range` flag reports when the miss exceeds half a grid step.
    pub fn nearest_band(&self, nm: f64) -> BandLookup {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (k, &c) in self.centers.iter().enumerate() {
            let d = (nm - c as f64).abs();
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        let n = self.centers.len();
        let lo = self.centers[0] as f64;
        let hi = self.centers[n - 1] as f64;
        let half_step_lo = if n > 1 {
            (self.centers[1] as f64 - lo) / 2.0
        } else {
            self.fwhm[0] as f64 / 2.0
        };
        let half_step_hi = if n > 1 {
            (hi - self.centers[n - 2] as f64) / 2.0
        } else {
            self.fwhm[0] as f64 / 2.0
        };
        let out_of_range = nm < lo - half_step_lo || nm > hi + half_step_hi;
        BandLookup {
            index: best,
            out_of_range,
        }
    }
}
