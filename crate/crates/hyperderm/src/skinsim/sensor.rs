//! Illumination and camera models: LED emission, quantum efficiency,
//! per-channel Gaussian responses, gain and noise figures.

use super::SimError;
use crate::cube::BandMap;
use serde::{Deserialize, Serialize};

/// FWHM of a Gaussian divided by its sigma: 2 sqrt(2 ln 2).
pub const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949;

/// One Gaussian emission component of the light source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedComponent {
    pub center_nm: f64,
    pub sigma_nm: f64,
    /// Relative peak power; the overall radiometric scale lives in the
    /// sensor gain, since the device reports no absolute units.
    pub power: f64,
}

/// Spectral power of the ring light: a phosphor white LED (blue die plus
/// broad phosphor hump) and two narrow IR LEDs at 910 and 970 nm. Between
/// the phosphor tail and the IR dies (roughly 760-890 nm) the output sags,
/// which is the real device's weak region as well; calibration quality
/// flags, not this model, deal with the consequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlluminationModel {
    pub components: Vec<LedComponent>,
}

impl IlluminationModel {
    pub fn standard() -> Self {
        Self {
            components: vec![
                LedComponent {
                    center_nm: 455.0,
                    sigma_nm: 15.0,
                    power: 0.85,
                },
                LedComponent {
                    center_nm: 570.0,
                    sigma_nm: 80.0,
                    power: 1.0,
                },
                LedComponent {
                    center_nm: 910.0,
                    sigma_nm: 17.0,
                    power: 0.9,
                },
                LedComponent {
                    center_nm: 970.0,
                    sigma_nm: 17.0,
                    power: 1.0,
                },
            ],
        }
    }

    /// Relative spectral power at `nm`; strictly positive everywhere
    /// because every component is a Gaussian.
    pub fn spectral_power(&self, nm: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let d = (nm - c.center_nm) / c.sigma_nm;
                c.power * (-0.5 * d * d).exp()
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.components.is_empty() {
            return Err(SimError::InvalidParams(
                "illumination needs at least one component".into(),
            ));
        }
        for c in &self.components {
            if !(c.center_nm.is_finite() && c.sigma_nm.is_finite() && c.power.is_finite()) {
                return Err(SimError::InvalidParams(
                    "illumination component has non-finite field".into(),
                ));
            }
            if c.sigma_nm <= 0.0 || c.power < 0.0 {
                return Err(SimError::InvalidParams(format!(
                    "illumination component at {} nm has sigma {} / power {}",
                    c.center_nm, c.sigma_nm, c.power
                )));
            }
        }
        Ok(())
    }
}

/// Logistic quantum-efficiency curve: qe(nm) = max / (1 + exp((nm - mid)/scale)),
/// decreasing toward the NIR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumEfficiency {
    pub max: f64,
    pub midpoint_nm: f64,
    pub scale_nm: f64,
}

/// Camera model: band map with Gaussian channel responses, quantum
/// efficiency, gain, and the two noise sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub band_map: BandMap,
    pub qe: QuantumEfficiency,
    /// Counts per unit of band-integrated radiant signal.
    pub gain: f64,
    /// Standard deviation of the Gaussian read noise, in counts.
    pub read_noise_sigma: f64,
    /// Whether rendering adds Poisson shot noise (read noise is governed
    /// separately by the render's noise switch).
    pub shot_noise: bool,
    /// ADC depth; full scale is 2^bit_depth - 1 = 4095 for the default 12.
    pub bit_depth: u8,
}

impl SensorModel {
    pub fn standard() -> Self {
        Self {
            band_map: BandMap::default_grid(),
            qe: QuantumEfficiency {
                max: 0.75,
                midpoint_nm: 810.0,
                scale_nm: 80.0,
            },
            // Chosen so a unit-reflectance target peaks near 3800 counts,
            // inside the 12-bit range with headroom below saturation.
            gain: 4200.0,
            read_noise_sigma: 2.0,
            shot_noise: true,
            bit_depth: 12,
        }
    }

    pub fn quantum_efficiency(&self, nm: f64) -> f64 {
        self.qe.max / (1.0 + ((nm - self.qe.midpoint_nm) / self.qe.scale_nm).exp())
    }

    /// Unit-area Gaussian response of channel `k` at `nm`.
    pub fn band_response(&self, k: usize, nm: f64) -> Result<f64, SimError> {
        let center = self.band_map.center(k)?;
        let sigma = self.band_map.fwhm_at(k)? / FWHM_TO_SIGMA;
        let d = (nm - center) / sigma;
        Ok((-0.5 * d * d).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
    }

    pub fn max_count(&self) -> u16 {
        (1u32 << self.bit_depth) as u16 - 1
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.qe.max > 0.0 && self.qe.max <= 1.0) {
            return Err(SimError::InvalidParams(format!(
                "qe max {} outside (0, 1]",
                self.qe.max
            )));
        }
        if !(self.qe.scale_nm.is_finite() && self.qe.scale_nm > 0.0)
            || !self.qe.midpoint_nm.is_finite()
        {
            return Err(SimError::InvalidParams("bad qe curve shape".into()));
        }
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(SimError::InvalidParams(format!("gain {} invalid", self.gain)));
        }
        if !(self.read_noise_sigma.is_finite() && self.read_noise_sigma >= 0.0) {
            return Err(SimError::InvalidParams(format!(
                "read noise sigma {} invalid",
                self.read_noise_sigma
            )));
        }
        if self.bit_depth == 0 || self.bit_depth > 12 {
            return Err(SimError::InvalidParams(format!(
                "bit depth {} outside 1..=12 (cube storage is 12-bit)",
                self.bit_depth
            )));
        }
        Ok(())
    }
}
