//! Flat-field calibration against simulated dark and white references.
//!
//! Renders a noisy capture plus 100-frame averaged references, converts
//! counts to reflectance, and compares the result to the render's own
//! ground truth, band by band, to show where the illumination leaves
//! enough signal to calibrate well and where it does not.
//!
//!     cargo run --example calibrate_cube

use std::error::Error;

use hyperderm::calib::{compute_reflectance, validate_references, DEFAULT_EPSILON};
use hyperderm::skinsim::{render_references, render_scene, PhantomScene, RenderConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let scene = PhantomScene::demo(32, 32);
    let mut cfg = RenderConfig::standard();
    cfg.seed = 3;

    let rendered = render_scene(&scene, &cfg)?;
    let refs = render_references(32, 32, &cfg, 100)?;
    println!(
        "references averaged over {} frames per stack",
        refs.frames_averaged()
    );

    let report = validate_references(&refs, DEFAULT_EPSILON)?;
    println!(
        "reference check: {:.2}% degenerate cells, suspect bands: {:?}",
        100.0 * report.degenerate_fraction,
        report.suspect_bands
    );

    let (reflectance, diag) = compute_reflectance(&rendered.cube, &refs, DEFAULT_EPSILON)?;
    println!(
        "calibrated: {:.2}% saturated, {:.2}% degenerate",
        100.0 * diag.saturated_fraction,
        100.0 * diag.degenerate_fraction
    );

    // Mean absolute relative error against ground truth, per band, next to
    // the white-reference level that drives it.
    println!("band   nm   white(cts)  mean |rel err|");
    let bands = reflectance.bands();
    for k in (0..bands).step_by(5) {
        let nm = reflectance.band_map().center(k)?;
        let mut err_sum = 0.0;
        let mut n = 0u32;
        let mut white_mean = 0.0;
        for r in 0..32 {
            for c in 0..32 {
                let w = refs.white().at(r, c, k);
                white_mean += w;
                let truth = rendered.truth.reflectance.at(r, c, k);
                if truth > 0.0 {
                    err_sum += (reflectance.value(r, c, k) - truth).abs() / truth;
                    n += 1;
                }
            }
        }
        white_mean /= 1024.0;
        println!(
            "{k:>4} {nm:>5.0} {white_mean:>11.1} {:>14.4}",
            err_sum / n as f64
        );
    }
    println!("(errors grow where the white level is low; that is the lamp, not the math)");
    Ok(())
}
