//! Scene rendering: spectra through illumination, quantum efficiency and
//! band responses into 12-bit counts, with seeded per-pixel noise and a
//! band-averaged ground-truth cube.

use super::chromophores::{table_wavelength, ChromophoreTables, TABLE_LEN, TABLE_STEP_NM};
use super::optics::{diffuse_reflectance, SkinOpticsParams};
use super::scene::PhantomScene;
use super::sensor::{IlluminationModel, SensorModel};
use super::SimError;
use crate::calib::ReferencePair;
use crate::cube::{CaptureMeta, CubeData, HyperCube, RealCube};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

/// Everything a render needs besides the scene itself.
#[derive(Clone, Debug)]
pub struct RenderConfig {
    pub sensor: SensorModel,
    pub illumination: IlluminationModel,
    /// Master noise switch; `false` renders exact rounded means.
    pub noise: bool,
    pub seed: u64,
    /// Capture metadata stamped into the output cube.
    pub meta: CaptureMeta,
}

impl RenderConfig {
    pub fn standard() -> Self {
        Self {
            sensor: SensorModel::standard(),
            illumination: IlluminationModel::standard(),
            noise: true,
            seed: 0,
            meta: CaptureMeta::default(),
        }
    }

    /// Standard config with noise off, for oracle-grade renders.
    pub fn noiseless() -> Self {
        Self {
            noise: false,
            ..Self::standard()
        }
    }
}

/// Per-pixel fields the render knows to be true about its own output.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// Band-averaged true reflectance per pixel: what a perfect
    /// calibration of a noise-free capture would recover.
    pub reflectance: RealCube,
    /// 255 under any lesion, 0 over background skin; row-major.
    pub class_mask: Vec<u8>,
    /// Region index per pixel: 0 background, i+1 for lesion i.
    pub region_map: Vec<u16>,
    /// Parameter sets by region index.
    pub region_params: Vec<SkinOpticsParams>,
}

/// A rendered capture and its ground truth.
#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub cube: HyperCube,
    pub truth: GroundTruth,
}

// RNG stream layout: each logical exposure gets a lane, and each pixel a
// substream within the lane, so row-parallel rendering and multi-frame
// averaging are both order-independent and fully reproducible.
const SCENE_LANE: u64 = 0;
const REFERENCE_LANE_BASE: u64 = 1;
const LANE_SHIFT: u32 = 40;

fn pixel_rng(seed: u64, lane: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((lane << LANE_SHIFT) | pixel as u64);
    rng
}

/// Precomputed quadrature of illumination x quantum efficiency x band
/// response over the chromophore grid, plus grid-aligned absorber curves,
/// so both rendering and fitting evaluate band spectra cheaply and
/// identically.
#[derive(Clone, Debug)]
pub struct BandIntegrator {
    bands: usize,
    /// Trapezoid weights E * qe * response per band, row-major bands x grid.
    weights: Vec<f64>,
    /// Per-band integral of E * qe * response: the signal of a unit target.
    white_signal: Vec<f64>,
    grid_oxy: Vec<f64>,
    grid_deoxy: Vec<f64>,
    grid_water: Vec<f64>,
    grid_melanin: Vec<f64>,
    /// ln(lambda/500) per grid sample, for the scattering power law.
    grid_log_ratio: Vec<f64>,
}

impl BandIntegrator {
    pub fn new(
        sensor: &SensorModel,
        light: &IlluminationModel,
        tables: &ChromophoreTables,
    ) -> Result<Self, SimError> {
        sensor.validate()?;
        light.validate()?;
        let bands = sensor.band_map.channel_count();
        let mut weights = vec![0.0f64; bands * TABLE_LEN];
        let mut white_signal = vec![0.0f64; bands];
        for k in 0..bands {
            for i in 0..TABLE_LEN {
                let nm = table_wavelength(i);
                let trap = if i == 0 || i == TABLE_LEN - 1 { 0.5 } else { 1.0 };
                let w = light.spectral_power(nm)
                    * sensor.quantum_efficiency(nm)
                    * sensor.band_response(k, nm)?
                    * trap
                    * TABLE_STEP_NM;
                weights[k * TABLE_LEN + i] = w;
                white_signal[k] += w;
            }
        }
        let mut grid_melanin = Vec::with_capacity(TABLE_LEN);
        let mut grid_log_ratio = Vec::with_capacity(TABLE_LEN);
        for i in 0..TABLE_LEN {
            let nm = table_wavelength(i);
            grid_melanin.push(super::chromophores::melanin_mua(nm)?);
            grid_log_ratio.push((nm / 500.0).ln());
        }
        Ok(Self {
            bands,
            weights,
            white_signal,
            grid_oxy: tables.oxyhemoglobin().to_vec(),
            grid_deoxy: tables.deoxyhemoglobin().to_vec(),
            grid_water: tables.water().to_vec(),
            grid_melanin,
            grid_log_ratio,
        })
    }

    pub fn band_count(&self) -> usize {
        self.bands
    }

    /// Integral of E * qe * response for band `k`: the band signal of a
    /// unit-reflectance target, before gain.
    pub fn white_signals(&self) -> &[f64] {
        &self.white_signal
    }

    /// True reflectance of `p` on the 2 nm chromophore grid.
    pub fn reflectance_grid(&self, p: &SkinOpticsParams) -> Result<Vec<f64>, SimError> {
        p.validate()?;
        let blood_oxy = p.blood_fraction * p.oxygenation;
        let blood_deoxy = p.blood_fraction * (1.0 - p.oxygenation);
        let mut out = Vec::with_capacity(TABLE_LEN);
        for i in 0..TABLE_LEN {
            let mua = p.melanin_fraction * self.grid_melanin[i]
                + blood_oxy * self.grid_oxy[i]
                + blood_deoxy * self.grid_deoxy[i]
                + p.water_fraction * self.grid_water[i];
            let musp = p.scatter_amplitude * (-p.scatter_power * self.grid_log_ratio[i]).exp();
            out.push(diffuse_reflectance(mua, musp)?);
        }
        Ok(out)
    }

    /// Weighted band average of a reflectance curve given on the grid:
    /// sum(w * R) / sum(w) per band. This is the definition of the
    /// "band-averaged true reflectance" used for ground truth, and exactly
    /// what noise-free capture plus calibration recovers.
    pub fn band_average(&self, r_grid: &[f64]) -> Vec<f64> {
        assert_eq!(r_grid.len(), TABLE_LEN, "reflectance grid length");
        (0..self.bands)
            .map(|k| {
                let row = &self.weights[k * TABLE_LEN..(k + 1) * TABLE_LEN];
                let num: f64 = row.iter().zip(r_grid).map(|(w, r)| w * r).sum();
                num / self.white_signal[k]
            })
            .collect()
    }

    /// Band-averaged reflectance spectrum of a parameter set; the forward
    /// model shared by rendering, ground truth, and the chromophore fit.
    pub fn forward_band_reflectance(&self, p: &SkinOpticsParams) -> Result<Vec<f64>, SimError> {
        Ok(self.band_average(&self.reflectance_grid(p)?))
    }
}

fn fill_pixel_counts(
    mu_photo: &[f64],
    sensor: &SensorModel,
    noise: bool,
    rng: &mut ChaCha8Rng,
    out: &mut [u16],
) {
    let ceiling = sensor.max_count() as f64;
    if !noise {
        for (o, &mu) in out.iter_mut().zip(mu_photo) {
            *o = mu.round().clamp(0.0, ceiling) as u16;
        }
        return;
    }
    let read = Normal::new(0.0, sensor.read_noise_sigma).expect("validated sigma");
    for (o, &mu) in out.iter_mut().zip(mu_photo) {
        let photo = if sensor.shot_noise && mu > 0.0 {
            Poisson::new(mu).expect("positive mean").sample(rng)
        } else {
            mu
        };
        let v: f64 = photo + read.sample(rng);
        *o = v.round().clamp(0.0, ceiling) as u16;
    }
}

fn render_counts(
    rows: usize,
    cols: usize,
    region_map: &[u16],
    mu_by_region: &[Vec<f64>],
    cfg: &RenderConfig,
    lane: u64,
) -> Vec<u16> {
    let bands = mu_by_region[0].len();
    let mut data = vec![0u16; rows * cols * bands];
    data.par_chunks_mut(cols * bands)
        .enumerate()
        .for_each(|(row, chunk)| {
            for col in 0..cols {
                let px = row * cols + col;
                let mu = &mu_by_region[region_map[px] as usize];
                let mut rng = pixel_rng(cfg.seed, lane, px);
                fill_pixel_counts(
                    mu,
                    &cfg.sensor,
                    cfg.noise,
                    &mut rng,
                    &mut chunk[col * bands..(col + 1) * bands],
                );
            }
        });
    data
}

/// Renders a phantom scene into a raw-counts cube plus ground truth.
/// Deterministic for a fixed seed, including under row parallelism.
pub fn render_scene(scene: &PhantomScene, cfg: &RenderConfig) -> Result<RenderOutput, SimError> {
    scene.validate()?;
    if scene.lesions.len() > u16::MAX as usize - 1 {
        return Err(SimError::InvalidParams("too many lesions".into()));
    }
    let integrator = BandIntegrator::new(
        &cfg.sensor,
        &cfg.illumination,
        ChromophoreTables::standard(),
    )?;
    let bands = integrator.band_count();
    let region_params: Vec<SkinOpticsParams> =
        scene.region_params().into_iter().copied().collect();

    // Per region: band-averaged reflectance and photo-signal means.
    let mut rbar_by_region = Vec::with_capacity(region_params.len());
    let mut mu_by_region = Vec::with_capacity(region_params.len());
    for p in &region_params {
        let rbar = integrator.forward_band_reflectance(p)?;
        let mu: Vec<f64> = rbar
            .iter()
            .zip(integrator.white_signals())
            .map(|(r, w)| cfg.sensor.gain * w * r)
            .collect();
        rbar_by_region.push(rbar);
        mu_by_region.push(mu);
    }

    let region_map: Vec<u16> = (0..scene.rows * scene.cols)
        .map(|px| scene.region_index(px / scene.cols, px % scene.cols) as u16)
        .collect();

    let data = render_counts(
        scene.rows,
        scene.cols,
        &region_map,
        &mu_by_region,
        cfg,
        SCENE_LANE,
    );
    let cube = HyperCube::new(
        scene.rows,
        scene.cols,
        CubeData::RawCounts(data),
        cfg.sensor.band_map.clone(),
        cfg.meta.clone(),
    )?;

    let mut truth_data = vec![0.0f64; scene.rows * scene.cols * bands];
    for px in 0..scene.rows * scene.cols {
        truth_data[px * bands..(px + 1) * bands]
            .copy_from_slice(&rbar_by_region[region_map[px] as usize]);
    }
    let truth = GroundTruth {
        reflectance: RealCube::new(scene.rows, scene.cols, bands, truth_data)?,
        class_mask: scene.class_mask(),
        region_map,
        region_params,
    };
    Ok(RenderOutput { cube, truth })
}

/// Renders one lights-off exposure: zero signal, read noise only.
pub fn render_dark(rows: usize, cols: usize, cfg: &RenderConfig) -> Result<HyperCube, SimError> {
    let integrator = BandIntegrator::new(
        &cfg.sensor,
        &cfg.illumination,
        ChromophoreTables::standard(),
    )?;
    let mu = vec![vec![0.0f64; integrator.band_count()]];
    let region_map = vec![0u16; rows * cols];
    let data = render_counts(rows, cols, &region_map, &mu, cfg, REFERENCE_LANE_BASE);
    Ok(HyperCube::new(
        rows,
        cols,
        CubeData::RawCounts(data),
        cfg.sensor.band_map.clone(),
        cfg.meta.clone(),
    )?)
}

/// Simulates the reference-capture protocol: `frames` lights-off and
/// unit-target exposures each, averaged. With noise disabled the exact
/// expected means are returned directly (zero dark signal, full white
/// signal), which is what oracle tests calibrate against.
pub fn render_references(
    rows: usize,
    cols: usize,
    cfg: &RenderConfig,
    frames: u32,
) -> Result<ReferencePair, SimError> {
    if frames == 0 {
        return Err(SimError::InvalidParams(
            "reference averaging needs at least one frame".into(),
        ));
    }
    let integrator = BandIntegrator::new(
        &cfg.sensor,
        &cfg.illumination,
        ChromophoreTables::standard(),
    )?;
    let bands = integrator.band_count();
    let cells = rows * cols * bands;
    let mu_white: Vec<f64> = integrator
        .white_signals()
        .iter()
        .map(|w| cfg.sensor.gain * w)
        .collect();

    if !cfg.noise {
        let dark = RealCube::new(rows, cols, bands, vec![0.0; cells])?;
        let mut w = vec![0.0f64; cells];
        for px in 0..rows * cols {
            w[px * bands..(px + 1) * bands].copy_from_slice(&mu_white);
        }
        let white = RealCube::new(rows, cols, bands, w)?;
        return Ok(ReferencePair::new(dark, white, frames)?);
    }

    let region_map = vec![0u16; rows * cols];
    let mu_dark = vec![vec![0.0f64; bands]];
    let mu_white_regions = vec![mu_white];
    let mut dark_acc = vec![0.0f64; cells];
    let mut white_acc = vec![0.0f64; cells];
    for f in 0..frames {
        let lane_dark = REFERENCE_LANE_BASE + 2 * f as u64;
        let lane_white = REFERENCE_LANE_BASE + 2 * f as u64 + 1;
        let d = render_counts(rows, cols, &region_map, &mu_dark, cfg, lane_dark);
        let w = render_counts(rows, cols, &region_map, &mu_white_regions, cfg, lane_white);
        for i in 0..cells {
            dark_acc[i] += d[i] as f64;
            white_acc[i] += w[i] as f64;
        }
    }
    let scale = 1.0 / frames as f64;
    for v in dark_acc.iter_mut().chain(white_acc.iter_mut()) {
        *v *= scale;
    }
    Ok(ReferencePair::new(
        RealCube::new(rows, cols, bands, dark_acc)?,
        RealCube::new(rows, cols, bands, white_acc)?,
        frames,
    )?)
}
