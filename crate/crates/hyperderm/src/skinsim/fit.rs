//! Inverse chromophore fit: bounded least squares on band spectra.
//!
//! The optimizer is a Nelder-Mead simplex with deterministic restarts:
//! derivative-free, dependency-free, and exactly reproducible for a given
//! init. Bounds are enforced by clamping each trial point into the box and
//! adding a quadratic penalty for the clamped distance, so the simplex is
//! steered back rather than stuck at the wall. A field whose lower and
//! upper bound coincide is pinned: it never enters the search space. That
//! is how the scattering pair (a, b) is usually held fixed, since a free
//! amplitude trades off exactly against the absorber scale.

use super::optics::SkinOpticsParams;
use super::render::BandIntegrator;
use super::SimError;

/// Box bounds over the six optical parameters, expressed as two parameter
/// sets. Equal lower and upper bound pins a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitBounds {
    pub lo: SkinOpticsParams,
    pub hi: SkinOpticsParams,
}

const FIELD_NAMES: [&str; 6] = [
    "melanin_fraction",
    "blood_fraction",
    "oxygenation",
    "water_fraction",
    "scatter_amplitude",
    "scatter_power",
];

fn to_vec(p: &SkinOpticsParams) -> [f64; 6] {
    [
        p.melanin_fraction,
        p.blood_fraction,
        p.oxygenation,
        p.water_fraction,
        p.scatter_amplitude,
        p.scatter_power,
    ]
}

fn from_vec(v: &[f64; 6]) -> SkinOpticsParams {
    SkinOpticsParams {
        melanin_fraction: v[0],
        blood_fraction: v[1],
        oxygenation: v[2],
        water_fraction: v[3],
        scatter_amplitude: v[4],
        scatter_power: v[5],
    }
}

impl FitBounds {
    /// Full physiological box with free scattering.
    pub fn standard() -> Self {
        Self {
            lo: SkinOpticsParams {
                melanin_fraction: 0.0,
                blood_fraction: 0.0,
                oxygenation: 0.0,
                water_fraction: 0.0,
                scatter_amplitude: 0.5,
                scatter_power: 0.1,
            },
            hi: SkinOpticsParams {
                melanin_fraction: 1.0,
                blood_fraction: 1.0,
                oxygenation: 1.0,
                water_fraction: 1.0,
                scatter_amplitude: 15.0,
                scatter_power: 3.0,
            },
        }
    }

    /// Standard box with the scattering power law pinned, the usual setup
    /// when fitting chromophores alone.
    pub fn with_fixed_scattering(a: f64, b: f64) -> Self {
        let mut bounds = Self::standard();
        bounds.lo.scatter_amplitude = a;
        bounds.hi.scatter_amplitude = a;
        bounds.lo.scatter_power = b;
        bounds.hi.scatter_power = b;
        bounds
    }

    fn validate(&self) -> Result<(), SimError> {
        let lo = to_vec(&self.lo);
        let hi = to_vec(&self.hi);
        for i in 0..6 {
            if !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(SimError::NonFiniteInput("fit bounds"));
            }
            if lo[i] > hi[i] {
                return Err(SimError::BoundsInverted {
                    field: FIELD_NAMES[i],
                });
            }
        }
        // Both corners must themselves be renderable parameter sets.
        self.lo.validate().map_err(|_| {
            SimError::InvalidParams("lower fit bound outside the model's domain".into())
        })?;
        self.hi.validate().map_err(|_| {
            SimError::InvalidParams("upper fit bound outside the model's domain".into())
        })?;
        Ok(())
    }

    fn clamp(&self, v: &mut [f64; 6]) -> f64 {
        let lo = to_vec(&self.lo);
        let hi = to_vec(&self.hi);
        let mut overshoot = 0.0;
        for i in 0..6 {
            let c = v[i].clamp(lo[i], hi[i]);
            let range = (hi[i] - lo[i]).max(1e-9);
            let d = (v[i] - c) / range;
            overshoot += d * d;
            v[i] = c;
        }
        overshoot
    }
}

/// Outcome of a fit: parameters, achieved sum of squared residuals, and
/// the number of forward evaluations spent.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: SkinOpticsParams,
    /// Sum over bands of (model - measured)^2.
    pub residual: f64,
    pub evaluations: usize,
}

const PENALTY_WEIGHT: f64 = 10.0;
const RESTART_STEPS: [f64; 4] = [0.1, 0.02, 0.004, 0.0008];
const MAX_ITER_PER_ROUND: usize = 2000;

struct Objective<'a> {
    measured: &'a [f64],
    integrator: &'a BandIntegrator,
    bounds: &'a FitBounds,
    evaluations: usize,
}

impl Objective<'_> {
    /// Clamps into bounds, evaluates the forward model, and returns the
    /// penalized sum of squares together with the feasible point.
    fn eval(&mut self, x: &[f64; 6]) -> (f64, [f64; 6]) {
        let mut inside = *x;
        let overshoot = self.bounds.clamp(&mut inside);
        let params = from_vec(&inside);
        self.evaluations += 1;
        let model = self
            .integrator
            .forward_band_reflectance(&params)
            .expect("clamped params are valid by bounds validation");
        let ss: f64 = model
            .iter()
            .zip(self.measured)
            .map(|(m, y)| (m - y) * (m - y))
            .sum();
        (ss + PENALTY_WEIGHT * overshoot, inside)
    }
}

/// Fits optical parameters to a measured band-reflectance spectrum using
/// the same band-averaged forward model the renderer uses.
///
/// `measured` must match the integrator's band count and hold at least 10
/// bands. Deterministic for a fixed init; the residual reported is the raw
/// sum of squares at the returned (always in-bounds) parameters.
pub fn fit_chromophores(
    measured: &[f64],
    integrator: &BandIntegrator,
    init: &SkinOpticsParams,
    bounds: &FitBounds,
) -> Result<FitResult, SimError> {
    bounds.validate()?;
    if measured.len() != integrator.band_count() {
        return Err(SimError::BandCountMismatch {
            expected: integrator.band_count(),
            found: measured.len(),
        });
    }
    if measured.len() < 10 {
        return Err(SimError::TooFewBands {
            found: measured.len(),
        });
    }
    if measured.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFiniteInput("measured spectrum"));
    }
    let init_vec = to_vec(init);
    if init_vec.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFiniteInput("initial parameters"));
    }

    let lo = to_vec(&bounds.lo);
    let hi = to_vec(&bounds.hi);
    let free: Vec<usize> = (0..6).filter(|&i| lo[i] < hi[i]).collect();

    let mut obj = Objective {
        measured,
        integrator,
        bounds,
        evaluations: 0,
    };

    let mut best = init_vec;
    bounds.clamp(&mut best);
    let (mut best_f, _) = obj.eval(&best);

    if free.is_empty() {
        return Ok(FitResult {
            params: from_vec(&best),
            residual: best_f,
            evaluations: obj.evaluations,
        });
    }

    for &step_scale in &RESTART_STEPS {
        let (x, f) = nelder_mead(&mut obj, &best, &free, &lo, &hi, step_scale);
        if f < best_f {
            best_f = f;
            best = x;
        }
        if best_f < 1e-16 {
            break;
        }
    }

    // Report the raw sum of squares at the final feasible point (the
    // penalty term is zero inside the box).
    let (residual, inside) = obj.eval(&best);
    Ok(FitResult {
        params: from_vec(&inside),
        residual,
        evaluations: obj.evaluations,
    })
}

/// One Nelder-Mead round over the free coordinates, started around `x0`.
fn nelder_mead(
    obj: &mut Objective<'_>,
    x0: &[f64; 6],
    free: &[usize],
    lo: &[f64; 6],
    hi: &[f64; 6],
    step_scale: f64,
) -> ([f64; 6], f64) {
    let n = free.len();
    let embed = |reduced: &[f64]| {
        let mut full = *x0;
        for (j, &i) in free.iter().enumerate() {
            full[i] = reduced[j];
        }
        full
    };

    let x0_reduced: Vec<f64> = free.iter().map(|&i| x0[i]).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let (f0, _) = obj.eval(&embed(&x0_reduced));
    simplex.push((x0_reduced.clone(), f0));
    for j in 0..n {
        let i = free[j];
        let mut step = step_scale * (hi[i] - lo[i]);
        // March inward when the start sits at the upper wall.
        if x0[i] + step > hi[i] {
            step = -step;
        }
        let mut v = x0_reduced.clone();
        v[j] += step;
        let (f, _) = obj.eval(&embed(&v));
        simplex.push((v, f));
    }

    for _ in 0..MAX_ITER_PER_ROUND {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is finite"));
        let best_f = simplex[0].1;
        let worst_f = simplex[n].1;
        if worst_f - best_f < 1e-14 * (1.0 + best_f.abs()) {
            break;
        }
        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for j in 0..n {
                centroid[j] += v[j];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let worst = simplex[n].0.clone();
        let lerp = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (centroid[j] - worst[j]))
                .collect()
        };

        let reflected = lerp(1.0);
        let (fr, _) = obj.eval(&embed(&reflected));
        if fr < simplex[0].1 {
            let expanded = lerp(2.0);
            let (fe, _) = obj.eval(&embed(&expanded));
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let contracted = if fr < simplex[n].1 {
            lerp(0.5)
        } else {
            lerp(-0.5)
        };
        let (fc, _) = obj.eval(&embed(&contracted));
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best_v = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            for (v, &b) in entry.0.iter_mut().zip(&best_v) {
                *v = b + 0.5 * (*v - b);
            }
            let (f, _) = obj.eval(&embed(&entry.0));
            entry.1 = f;
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is finite"));
    (embed(&simplex[0].0), simplex[0].1)
}
