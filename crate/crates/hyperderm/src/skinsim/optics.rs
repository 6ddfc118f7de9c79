//! Bulk optical properties and the semi-infinite diffuse reflectance.

use super::chromophores::{melanin_mua, sample, ChromophoreTables};
use super::SimError;
use serde::{Deserialize, Serialize};

/// Weight of absorption relative to reduced scattering in the reflectance
/// closed form below. The constant folds in the boundary condition for
/// tissue under the instrument's glass contact plate: it was calibrated so
/// that at mu_a = mu_s' the form agrees with a numerical two-flux slab
/// computation (0.100 here vs ~0.101 there), and it stays within the 20%
/// model-form envelope of that reference for mu_a/mu_s' from 1e-3 to 1,
/// which covers skin across the working range.
pub const REFLECTANCE_MUA_WEIGHT: f64 = 9.0;

/// Homogenized optical parameters of a skin (or phantom) region.
///
/// `melanin_fraction` scales the melanin reference curve (see
/// [`super::chromophores::MELANIN_MUA_500`]); `blood_fraction` and
/// `water_fraction` are volume fractions of whole blood and water;
/// `oxygenation` splits blood between the oxy and deoxy tables. Scattering
/// follows the power law a (lambda/500)^-b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinOpticsParams {
    pub melanin_fraction: f64,
    pub blood_fraction: f64,
    pub oxygenation: f64,
    pub water_fraction: f64,
    /// Reduced scattering at 500 nm, 1/mm.
    pub scatter_amplitude: f64,
    /// Dimensionless scattering power.
    pub scatter_power: f64,
}

impl SkinOpticsParams {
    /// Lightly pigmented healthy skin; also the rendering default.
    pub fn typical_skin() -> Self {
        Self {
            melanin_fraction: 0.02,
            blood_fraction: 0.02,
            oxygenation: 0.7,
            water_fraction: 0.65,
            scatter_amplitude: 6.0,
            scatter_power: 0.7,
        }
    }

    /// Pigmented lesion: melanin an order of magnitude above skin and a
    /// raised blood fraction, the combination seen over nevi.
    pub fn typical_lesion() -> Self {
        Self {
            melanin_fraction: 0.2,
            blood_fraction: 0.05,
            ..Self::typical_skin()
        }
    }

    /// No absorbers at all; reflectance is 1 at every wavelength.
    pub fn clear(scatter_amplitude: f64, scatter_power: f64) -> Self {
        Self {
            melanin_fraction: 0.0,
            blood_fraction: 0.0,
            oxygenation: 0.0,
            water_fraction: 0.0,
            scatter_amplitude,
            scatter_power,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("melanin_fraction", self.melanin_fraction),
            ("blood_fraction", self.blood_fraction),
            ("oxygenation", self.oxygenation),
            ("water_fraction", self.water_fraction),
            ("scatter_amplitude", self.scatter_amplitude),
            ("scatter_power", self.scatter_power),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(SimError::InvalidParams(format!("{name} is not finite")));
            }
        }
        for (name, v) in fields.iter().take(4) {
            if !(0.0..=1.0).contains(v) {
                return Err(SimError::InvalidParams(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.scatter_amplitude <= 0.0 {
            return Err(SimError::InvalidParams(format!(
                "scatter_amplitude = {} must be positive",
                self.scatter_amplitude
            )));
        }
        if self.scatter_power <= 0.0 {
            return Err(SimError::InvalidParams(format!(
                "scatter_power = {} must be positive",
                self.scatter_power
            )));
        }
        Ok(())
    }
}

impl Default for SkinOpticsParams {
    fn default() -> Self {
        Self::typical_skin()
    }
}

/// Total absorption coefficient in 1/mm: linear mix of the chromophore
/// tables weighted by the parameter fractions.
pub fn total_absorption(
    nm: f64,
    p: &SkinOpticsParams,
    tables: &ChromophoreTables,
) -> Result<f64, SimError> {
    let oxy = sample(tables.oxyhemoglobin(), nm)?;
    let deoxy = sample(tables.deoxyhemoglobin(), nm)?;
    let water = sample(tables.water(), nm)?;
    let melanin = melanin_mua(nm)?;
    Ok(p.melanin_fraction * melanin
        + p.blood_fraction * (p.oxygenation * oxy + (1.0 - p.oxygenation) * deoxy)
        + p.water_fraction * water)
}

/// Reduced scattering coefficient in 1/mm: a (lambda/500)^-b, strictly
/// decreasing in wavelength for b > 0.
pub fn reduced_scattering(nm: f64, p: &SkinOpticsParams) -> Result<f64, SimError> {
    if !(nm > 0.0) {
        return Err(SimError::WavelengthOutOfRange { nm });
    }
    Ok(p.scatter_amplitude * (nm / 500.0).powf(-p.scatter_power))
}

/// Semi-infinite diffuse reflectance:
///
/// ```text
/// R = mu_s' / (mu_s' + 9 mu_a)
/// ```
///
/// A rational function of the single similarity variable mu_a/mu_s'. It is
/// exact in both limits (R -> 1 as mu_a -> 0, R -> 0 as mu_a grows),
/// strictly monotonic in each argument, and keeps a finite absorption
/// sensitivity at small mu_a, which is what lets melanin contrast fade
/// smoothly in the NIR instead of diverging. See
/// [`REFLECTANCE_MUA_WEIGHT`] for the provenance of the constant.
pub fn diffuse_reflectance(mua: f64, musp: f64) -> Result<f64, SimError> {
    if !musp.is_finite() || musp <= 0.0 {
        return Err(SimError::NonPositiveScattering { musp });
    }
    if !mua.is_finite() || mua < 0.0 {
        return Err(SimError::NegativeAbsorption { mua });
    }
    Ok(musp / (musp + REFLECTANCE_MUA_WEIGHT * mua))
}

/// Partial derivatives (dR/dmu_a, dR/dmu_s') of [`diffuse_reflectance`].
pub fn diffuse_reflectance_gradient(mua: f64, musp: f64) -> Result<(f64, f64), SimError> {
    diffuse_reflectance(mua, musp)?;
    let denom = musp + REFLECTANCE_MUA_WEIGHT * mua;
    let d_mua = -REFLECTANCE_MUA_WEIGHT * musp / (denom * denom);
    let d_musp = REFLECTANCE_MUA_WEIGHT * mua / (denom * denom);
    Ok((d_mua, d_musp))
}

/// Reflectance at a single wavelength for a parameter set.
pub fn reflectance_at(
    nm: f64,
    p: &SkinOpticsParams,
    tables: &ChromophoreTables,
) -> Result<f64, SimError> {
    let mua = total_absorption(nm, p, tables)?;
    let musp = reduced_scattering(nm, p)?;
    diffuse_reflectance(mua, musp)
}

/// Reflectance spectrum over an arbitrary wavelength list.
pub fn skin_spectrum(
    p: &SkinOpticsParams,
    wavelengths: &[f64],
    tables: &ChromophoreTables,
) -> Result<Vec<f64>, SimError> {
    p.validate()?;
    wavelengths
        .iter()
        .map(|&nm| reflectance_at(nm, p, tables))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent two-flux reference: start from a vanishingly thin slab
    /// and double its thickness until transmission dies, using the layer
    /// composition identities R_2L = R + T^2 R/(1 - R^2), T_2L =
    /// T^2/(1 - R^2). Absorption/scattering enter through the similarity
    /// mapping K = 2 mu_a, S = (3/4) mu_s' - (1/4) mu_a, valid for
    /// mu_a < 3 mu_s'.
    fn two_flux_reflectance(mua: f64, musp: f64) -> f64 {
        let k = 2.0 * mua;
        let s = 0.75 * musp - 0.25 * mua;
        assert!(s > 0.0, "similarity mapping needs mu_a < 3 mu_s'");
        let dz = 1e-7 / (k + s);
        let mut r = s * dz;
        let mut t = 1.0 - (k + s) * dz;
        for _ in 0..80 {
            let denom = 1.0 - r * r;
            let r2 = r + t * t * r / denom;
            t = t * t / denom;
            r = r2;
            if t < 1e-16 {
                break;
            }
        }
        r
    }

    /// Closed-form semi-infinite two-flux result, as a check on the
    /// doubling routine itself.
    fn two_flux_closed_form(mua: f64, musp: f64) -> f64 {
        let ks = 2.0 * mua / (0.75 * musp - 0.25 * mua);
        1.0 + ks - (ks * ks + 2.0 * ks).sqrt()
    }

    #[test]
    fn doubling_oracle_agrees_with_its_closed_form() {
        for (mua, musp) in [(1.0, 1.0), (0.1, 5.0), (0.01, 4.0), (0.5, 2.0)] {
            let a = two_flux_reflectance(mua, musp);
            let b = two_flux_closed_form(mua, musp);
            assert!(
                (a - b).abs() / b < 1e-4,
                "doubling {a} vs closed form {b} at ({mua}, {musp})"
            );
        }
    }

    #[test]
    fn matches_two_flux_at_equal_coefficients() {
        let model = diffuse_reflectance(1.0, 1.0).unwrap();
        let reference = two_flux_reflectance(1.0, 1.0);
        let rel = (model - reference).abs() / reference;
        assert!(
            rel < 0.2,
            "model {model} vs two-flux {reference}: {rel:.3} relative"
        );
        // The constant was calibrated at this point, so it is much closer.
        assert!(rel < 0.02);
    }

    #[test]
    fn stays_within_model_form_envelope_across_working_range() {
        let musp = 4.0;
        for ratio in [1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 0.5, 1.0] {
            let mua = ratio * musp;
            let model = diffuse_reflectance(mua, musp).unwrap();
            let reference = two_flux_reflectance(mua, musp);
            let rel = (model - reference).abs() / reference;
            assert!(
                rel < 0.2,
                "ratio {ratio}: model {model} vs two-flux {reference}"
            );
        }
    }

    #[test]
    fn zero_absorption_reflects_everything() {
        assert_eq!(diffuse_reflectance(0.0, 3.0).unwrap(), 1.0);
        let p = SkinOpticsParams::clear(6.0, 0.7);
        let grid: Vec<f64> = (0..51).map(|k| 450.0 + 10.0 * k as f64).collect();
        let spec = skin_spectrum(&p, &grid, ChromophoreTables::standard()).unwrap();
        assert!(spec.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn monotone_in_both_arguments() {
        let r1 = diffuse_reflectance(0.1, 3.0).unwrap();
        let r2 = diffuse_reflectance(0.2, 3.0).unwrap();
        assert!(r1 > r2, "more absorption must darken");
        let r3 = diffuse_reflectance(0.1, 4.0).unwrap();
        assert!(r3 > r1, "more scattering must brighten");
        for (mua, musp) in [(0.0, 1.0), (5.0, 0.5), (100.0, 2.0)] {
            let r = diffuse_reflectance(mua, musp).unwrap();
            assert!(r > 0.0 && r <= 1.0, "R out of (0,1] at ({mua}, {musp})");
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(matches!(
            diffuse_reflectance(0.1, 0.0),
            Err(SimError::NonPositiveScattering { .. })
        ));
        assert!(matches!(
            diffuse_reflectance(-0.1, 1.0),
            Err(SimError::NegativeAbsorption { .. })
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mua = rng.gen_range(0.01..2.0);
            let musp = rng.gen_range(0.5..8.0);
            let (ga, gs) = diffuse_reflectance_gradient(mua, musp).unwrap();
            let h = 1e-5;
            let fa = (diffuse_reflectance(mua + h, musp).unwrap()
                - diffuse_reflectance(mua - h, musp).unwrap())
                / (2.0 * h);
            let fs = (diffuse_reflectance(mua, musp + h).unwrap()
                - diffuse_reflectance(mua, musp - h).unwrap())
                / (2.0 * h);
            assert!((ga - fa).abs() / fa.abs() < 1e-4, "dR/dmua {ga} vs fd {fa}");
            assert!((gs - fs).abs() / fs.abs() < 1e-4, "dR/dmusp {gs} vs fd {fs}");
        }
    }

    #[test]
    fn absorption_is_linear_in_each_fraction() {
        let tables = ChromophoreTables::standard();
        let zero = SkinOpticsParams::clear(6.0, 0.7);
        assert_eq!(total_absorption(550.0, &zero, tables).unwrap(), 0.0);
        let single = SkinOpticsParams {
            melanin_fraction: 0.1,
            ..zero
        };
        let double = SkinOpticsParams {
            melanin_fraction: 0.2,
            ..zero
        };
        for nm in [450.0, 550.0, 700.0, 950.0] {
            let a1 = total_absorption(nm, &single, tables).unwrap();
            let a2 = total_absorption(nm, &double, tables).unwrap();
            assert!((a2 - 2.0 * a1).abs() < 1e-12, "not linear at {nm} nm");
        }
    }

    #[test]
    fn oxygenated_blood_peaks_in_the_green_yellow() {
        // With ox = 1, the absorption maximum over [500, 600] sits at one
        // of the oxyhemoglobin peaks.
        let tables = ChromophoreTables::standard();
        let p = SkinOpticsParams {
            blood_fraction: 0.05,
            oxygenation: 1.0,
            ..SkinOpticsParams::clear(6.0, 0.7)
        };
        let mut best = (0.0f64, 0.0f64);
        let mut nm = 500.0;
        while nm <= 600.0 {
            let mua = total_absorption(nm, &p, tables).unwrap();
            if mua > best.1 {
                best = (nm, mua);
            }
            nm += 1.0;
        }
        assert!(
            (best.0 - 540.0).abs() <= 5.0 || (best.0 - 575.0).abs() <= 5.0,
            "argmax at {} nm",
            best.0
        );
    }

    #[test]
    fn scattering_power_law_reference_points() {
        let p = SkinOpticsParams {
            scatter_amplitude: 2.0,
            scatter_power: 1.0,
            ..SkinOpticsParams::typical_skin()
        };
        assert_eq!(reduced_scattering(500.0, &p).unwrap(), 2.0);
        assert!((reduced_scattering(1000.0, &p).unwrap() - 1.0).abs() < 1e-12);
        let q = SkinOpticsParams {
            scatter_amplitude: 2.0,
            scatter_power: 1.3,
            ..p
        };
        let expect = 2.0 * (700.0f64 / 500.0).powf(-1.3);
        assert!((reduced_scattering(700.0, &q).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn typical_skin_dips_near_540() {
        let tables = ChromophoreTables::standard();
        let p = SkinOpticsParams::typical_skin();
        // Scan at 2 nm and collect strict local minima of R.
        let mut minima = Vec::new();
        let grid: Vec<f64> = (0..101).map(|i| 500.0 + i as f64).collect();
        let spec = skin_spectrum(&p, &grid, tables).unwrap();
        for i in 1..spec.len() - 1 {
            if spec[i] < spec[i - 1] && spec[i] < spec[i + 1] {
                minima.push(grid[i]);
            }
        }
        assert!(
            minima.iter().any(|&nm| (nm - 540.0).abs() <= 10.0),
            "no reflectance minimum within 10 nm of 540; minima {minima:?}"
        );
    }

    #[test]
    fn lesion_darker_in_visible_and_converging_in_nir() {
        let tables = ChromophoreTables::standard();
        let skin = SkinOpticsParams::typical_skin();
        // Same everything except melanin, per the convergence story.
        let lesion = SkinOpticsParams {
            melanin_fraction: 0.2,
            ..skin
        };
        let grid: Vec<f64> = (0..51).map(|k| 450.0 + 10.0 * k as f64).collect();
        let rs = skin_spectrum(&skin, &grid, tables).unwrap();
        let rl = skin_spectrum(&lesion, &grid, tables).unwrap();
        for (i, &nm) in grid.iter().enumerate() {
            if nm <= 700.0 {
                assert!(rl[i] < rs[i], "lesion not darker at {nm} nm");
            }
        }
        let d550 = (rs[10] - rl[10]).abs();
        let d950 = (rs[50] - rl[50]).abs();
        assert!(
            d950 < d550,
            "contrast must shrink into the NIR: 950 {d950} vs 550 {d550}"
        );
    }

    #[test]
    fn validation_rejects_out_of_range_params() {
        let mut p = SkinOpticsParams::typical_skin();
        p.blood_fraction = 1.5;
        assert!(p.validate().is_err());
        p = SkinOpticsParams::typical_skin();
        p.scatter_amplitude = 0.0;
        assert!(p.validate().is_err());
        p = SkinOpticsParams::typical_skin();
        p.scatter_power = -0.1;
        assert!(p.validate().is_err());
        p = SkinOpticsParams::typical_skin();
        p.melanin_fraction = f64::NAN;
        assert!(p.validate().is_err());
        assert!(SkinOpticsParams::typical_lesion().validate().is_ok());
    }
}
