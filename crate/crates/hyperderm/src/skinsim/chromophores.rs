//! Absorption spectra of the modeled skin chromophores.
//!
//! Hemoglobin and water are tabulated from anchor points following the
//! standard literature compilations, resampled by linear interpolation
//! onto a 2 nm grid spanning 400-1000 nm. Absolute magnitudes are
//! representative rather than metrological; the contractual facts are the
//! peak locations (oxyhemoglobin near 540 and 575 nm, deoxyhemoglobin near
//! 555 nm, water near 970 nm) and the NIR ordering (deoxy above oxy below
//! ~800 nm, oxy above deoxy beyond).
//!
//! Melanin is the usual power law, normalized at 500 nm, evaluated
//! directly instead of tabulated.
//!
//! Hemoglobin anchors are stored as molar extinction (1/(M cm)) and
//! converted to the absorption coefficient of whole blood at 150 g/L
//! hemoglobin; water anchors are absorption of pure water in 1/mm. All
//! public values are 1/mm at unit volume fraction.

use super::SimError;
use std::sync::OnceLock;

/// Grid start, inclusive.
pub const TABLE_MIN_NM: f64 = 400.0;
/// Grid end, inclusive.
pub const TABLE_MAX_NM: f64 = 1000.0;
/// Grid spacing.
pub const TABLE_STEP_NM: f64 = 2.0;
/// Number of grid samples: 400, 402, ..., 1000.
pub const TABLE_LEN: usize = 301;

/// Converts molar extinction (1/(M cm)) to whole-blood absorption (1/mm):
/// ln(10) x c / 10 with c = 150 g/L over 64500 g/mol.
pub const WHOLE_BLOOD_EXTINCTION_TO_MUA: f64 = 5.356e-4;

/// Melanin absorption at 500 nm for melanin parameter 1.0, in 1/mm.
/// The value is an effective, epidermis-averaged scale: melanin lives in a
/// thin layer but this model homogenizes it over the sampled depth.
pub const MELANIN_MUA_500: f64 = 2.0;
/// Exponent of the melanin power-law decay.
pub const MELANIN_EXPONENT: f64 = 3.33;

// Oxyhemoglobin molar extinction anchors (nm, 1/(M cm)). Twin visible
// peaks at 542 and 576 nm; minimum near 690 nm; slow rise through the NIR.
const OXY_ANCHORS: &[(f64, f64)] = &[
    (400.0, 266_000.0),
    (414.0, 480_000.0),
    (426.0, 200_000.0),
    (436.0, 70_000.0),
    (450.0, 44_000.0),
    (466.0, 20_000.0),
    (480.0, 15_000.0),
    (492.0, 16_500.0),
    (506.0, 21_500.0),
    (516.0, 29_000.0),
    (526.0, 37_000.0),
    (534.0, 46_000.0),
    (542.0, 53_200.0),
    (548.0, 50_000.0),
    (554.0, 44_000.0),
    (560.0, 40_000.0),
    (568.0, 47_000.0),
    (576.0, 54_400.0),
    (584.0, 35_000.0),
    (590.0, 17_000.0),
    (596.0, 7_200.0),
    (604.0, 2_800.0),
    (614.0, 1_400.0),
    (626.0, 900.0),
    (640.0, 500.0),
    (660.0, 320.0),
    (680.0, 290.0),
    (700.0, 290.0),
    (730.0, 390.0),
    (750.0, 520.0),
    (778.0, 700.0),
    (800.0, 816.0),
    (830.0, 974.0),
    (850.0, 1_058.0),
    (880.0, 1_154.0),
    (900.0, 1_198.0),
    (930.0, 1_214.0),
    (950.0, 1_196.0),
    (970.0, 1_130.0),
    (1000.0, 1_086.0),
];

// Deoxyhemoglobin molar extinction anchors (nm, 1/(M cm)). Single visible
// peak at 556 nm; the 758 nm shoulder; gentle NIR decline.
const DEOXY_ANCHORS: &[(f64, f64)] = &[
    (400.0, 223_000.0),
    (416.0, 300_000.0),
    (430.0, 530_000.0),
    (444.0, 150_000.0),
    (458.0, 50_000.0),
    (470.0, 33_000.0),
    (490.0, 23_000.0),
    (500.0, 20_900.0),
    (510.0, 25_800.0),
    (520.0, 31_000.0),
    (530.0, 39_000.0),
    (540.0, 46_500.0),
    (548.0, 51_600.0),
    (556.0, 53_400.0),
    (564.0, 49_000.0),
    (576.0, 38_000.0),
    (584.0, 30_000.0),
    (592.0, 22_000.0),
    (600.0, 14_600.0),
    (616.0, 8_000.0),
    (632.0, 5_000.0),
    (660.0, 3_227.0),
    (690.0, 2_100.0),
    (716.0, 1_600.0),
    (744.0, 1_210.0),
    (758.0, 1_675.0),
    (772.0, 1_300.0),
    (800.0, 830.0),
    (830.0, 760.0),
    (860.0, 720.0),
    (900.0, 700.0),
    (950.0, 680.0),
    (1000.0, 650.0),
];

// Pure-water absorption anchors (nm, 1/mm). Minimum in the blue-green,
// shoulder at 760 nm, dominant local peak at 970 nm.
const WATER_ANCHORS: &[(f64, f64)] = &[
    (400.0, 5.8e-5),
    (420.0, 4.6e-6),
    (450.0, 9.2e-6),
    (480.0, 1.4e-5),
    (500.0, 2.5e-5),
    (550.0, 4.5e-5),
    (600.0, 2.2e-4),
    (650.0, 3.2e-4),
    (700.0, 6.0e-4),
    (730.0, 1.9e-3),
    (750.0, 2.6e-3),
    (760.0, 2.7e-3),
    (800.0, 2.0e-3),
    (850.0, 4.3e-3),
    (900.0, 6.8e-3),
    (920.0, 1.4e-2),
    (940.0, 2.7e-2),
    (950.0, 3.88e-2),
    (970.0, 4.5e-2),
    (1000.0, 3.64e-2),
];

/// Which absorber a table query refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chromophore {
    OxyHemoglobin,
    DeoxyHemoglobin,
    Water,
    Melanin,
}

/// The resampled absorption tables, shared process-wide via
/// [`ChromophoreTables::standard`].
#[derive(Clone, Debug)]
pub struct ChromophoreTables {
    oxy: Vec<f64>,
    deoxy: Vec<f64>,
    water: Vec<f64>,
}

impl ChromophoreTables {
    pub fn standard() -> &'static ChromophoreTables {
        static TABLES: OnceLock<ChromophoreTables> = OnceLock::new();
        TABLES.get_or_init(|| ChromophoreTables {
            oxy: resample(OXY_ANCHORS, WHOLE_BLOOD_EXTINCTION_TO_MUA),
            deoxy: resample(DEOXY_ANCHORS, WHOLE_BLOOD_EXTINCTION_TO_MUA),
            water: resample(WATER_ANCHORS, 1.0),
        })
    }

    /// Whole-blood absorption, fully oxygenated, on the 2 nm grid.
    pub fn oxyhemoglobin(&self) -> &[f64] {
        &self.oxy
    }

    /// Whole-blood absorption, fully deoxygenated, on the 2 nm grid.
    pub fn deoxyhemoglobin(&self) -> &[f64] {
        &self.deoxy
    }

    /// Pure-water absorption on the 2 nm grid.
    pub fn water(&self) -> &[f64] {
        &self.water
    }

    /// Absorption in 1/mm at unit volume fraction (melanin: unit melanin
    /// parameter), linearly interpolated between grid samples.
    pub fn absorption(&self, chromophore: Chromophore, nm: f64) -> Result<f64, SimError> {
        match chromophore {
            Chromophore::OxyHemoglobin => sample(&self.oxy, nm),
            Chromophore::DeoxyHemoglobin => sample(&self.deoxy, nm),
            Chromophore::Water => sample(&self.water, nm),
            Chromophore::Melanin => melanin_mua(nm),
        }
    }
}

/// Wavelength of grid sample `i`.
pub fn table_wavelength(i: usize) -> f64 {
    TABLE_MIN_NM + TABLE_STEP_NM * i as f64
}

/// Melanin absorption at melanin parameter 1.0, in 1/mm. Strictly
/// decreasing in wavelength.
pub fn melanin_mua(nm: f64) -> Result<f64, SimError> {
    if !(TABLE_MIN_NM..=TABLE_MAX_NM).contains(&nm) {
        return Err(SimError::WavelengthOutOfRange { nm });
    }
    Ok(MELANIN_MUA_500 * (nm / 500.0).powf(-MELANIN_EXPONENT))
}

/// Linear interpolation of a grid-sampled table at `nm`.
pub fn sample(table: &[f64], nm: f64) -> Result<f64, SimError> {
    if !nm.is_finite() || !(TABLE_MIN_NM..=TABLE_MAX_NM).contains(&nm) {
        return Err(SimError::WavelengthOutOfRange { nm });
    }
    let pos = (nm - TABLE_MIN_NM) / TABLE_STEP_NM;
    let i = (pos.floor() as usize).min(table.len() - 2);
    let t = pos - i as f64;
    Ok(table[i] * (1.0 - t) + table[i + 1] * t)
}

fn resample(anchors: &[(f64, f64)], scale: f64) -> Vec<f64> {
    assert!(anchors.len() >= 2, "anchor table too short");
    assert_eq!(anchors[0].0, TABLE_MIN_NM, "anchors must start at grid start");
    assert_eq!(
        anchors[anchors.len() - 1].0,
        TABLE_MAX_NM,
        "anchors must end at grid end"
    );
    let mut out = Vec::with_capacity(TABLE_LEN);
    let mut seg = 0usize;
    for i in 0..TABLE_LEN {
        let nm = table_wavelength(i);
        while seg + 2 < anchors.len() && anchors[seg + 1].0 < nm {
            seg += 1;
        }
        let (x0, y0) = anchors[seg];
        let (x1, y1) = anchors[seg + 1];
        let t = ((nm - x0) / (x1 - x0)).clamp(0.0, 1.0);
        out.push(scale * (y0 * (1.0 - t) + y1 * t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Indices of strict local maxima of `table` restricted to
    /// wavelengths in [lo, hi].
    fn local_maxima_nm(table: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 1..table.len() - 1 {
            let nm = table_wavelength(i);
            if nm < lo || nm > hi {
                continue;
            }
            if table[i] > table[i - 1] && table[i] > table[i + 1] {
                out.push(nm);
            }
        }
        out
    }

    #[test]
    fn tables_have_grid_length_and_positive_values() {
        let t = ChromophoreTables::standard();
        for table in [t.oxyhemoglobin(), t.deoxyhemoglobin(), t.water()] {
            assert_eq!(table.len(), TABLE_LEN);
            assert!(table.iter().all(|v| v.is_finite() && *v > 0.0));
        }
        assert_eq!(table_wavelength(0), 400.0);
        assert_eq!(table_wavelength(TABLE_LEN - 1), 1000.0);
    }

    #[test]
    fn oxyhemoglobin_twin_peaks_near_540_and_575() {
        let t = ChromophoreTables::standard();
        let peaks = local_maxima_nm(t.oxyhemoglobin(), 500.0, 600.0);
        assert!(
            peaks.iter().any(|&nm| (nm - 540.0).abs() <= 5.0),
            "no peak within 5 nm of 540, peaks at {peaks:?}"
        );
        assert!(
            peaks.iter().any(|&nm| (nm - 575.0).abs() <= 5.0),
            "no peak within 5 nm of 575, peaks at {peaks:?}"
        );
    }

    #[test]
    fn deoxyhemoglobin_single_dominant_peak_near_555() {
        let t = ChromophoreTables::standard();
        let table = t.deoxyhemoglobin();
        let (argmax, _) = table
            .iter()
            .enumerate()
            .filter(|(i, _)| (500.0..=600.0).contains(&table_wavelength(*i)))
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let nm = table_wavelength(argmax);
        assert!(
            (nm - 555.0).abs() <= 5.0,
            "deoxy visible peak at {nm} nm, expected near 555"
        );
    }

    #[test]
    fn water_peak_within_10_of_970() {
        let t = ChromophoreTables::standard();
        let peaks = local_maxima_nm(t.water(), 900.0, 1000.0);
        assert!(
            peaks.iter().any(|&nm| (nm - 970.0).abs() <= 10.0),
            "no water peak within 10 nm of 970, peaks at {peaks:?}"
        );
        // The tabulated magnitude at the peak itself.
        let at_970 = sample(t.water(), 970.0).unwrap();
        assert!((at_970 - 0.045).abs() < 1e-12);
    }

    #[test]
    fn melanin_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..TABLE_LEN {
            let v = melanin_mua(table_wavelength(i)).unwrap();
            assert!(v < prev, "melanin not decreasing at index {i}");
            prev = v;
        }
        assert_eq!(melanin_mua(500.0).unwrap(), MELANIN_MUA_500);
    }

    #[test]
    fn nir_ordering_flips_near_800() {
        let t = ChromophoreTables::standard();
        for nm in [650.0, 700.0, 750.0, 780.0] {
            let oxy = sample(t.oxyhemoglobin(), nm).unwrap();
            let deoxy = sample(t.deoxyhemoglobin(), nm).unwrap();
            assert!(deoxy > oxy, "deoxy should dominate at {nm} nm");
        }
        for nm in [830.0, 900.0, 950.0] {
            let oxy = sample(t.oxyhemoglobin(), nm).unwrap();
            let deoxy = sample(t.deoxyhemoglobin(), nm).unwrap();
            assert!(oxy > deoxy, "oxy should dominate at {nm} nm");
        }
    }

    #[test]
    fn interpolation_hits_midpoints_and_rejects_outside() {
        let t = ChromophoreTables::standard();
        let grid = t.water();
        let mid = sample(grid, 401.0).unwrap();
        assert!((mid - 0.5 * (grid[0] + grid[1])).abs() < 1e-15);
        assert!(matches!(
            sample(grid, 399.9),
            Err(SimError::WavelengthOutOfRange { .. })
        ));
        assert!(matches!(
            sample(grid, 1000.1),
            Err(SimError::WavelengthOutOfRange { .. })
        ));
        assert!(matches!(
            melanin_mua(f64::NAN),
            Err(SimError::WavelengthOutOfRange { .. })
        ));
    }

    #[test]
    fn whole_blood_conversion_matches_extinction_anchor() {
        // The classic deoxy anchor at 660 nm: 3227 1/(M cm) of extinction
        // is about 1.73/mm of whole-blood absorption at 150 g/L.
        let t = ChromophoreTables::standard();
        let v = sample(t.deoxyhemoglobin(), 660.0).unwrap();
        assert!((v - 3_227.0 * WHOLE_BLOOD_EXTINCTION_TO_MUA).abs() < 1e-12);
        assert!((v - 1.728).abs() < 0.01);
    }
}
