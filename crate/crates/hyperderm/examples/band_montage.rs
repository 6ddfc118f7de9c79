//! Band montage: one grayscale tile per requested wavelength.
//!
//! Renders a lesion capture, calibrates it, and lays out the 450-950 nm
//! range in 50 nm steps, normalized per tile so dim NIR bands stay
//! visible. Also demonstrates the melanin signature the montage makes
//! visible: within the lesion, reflectance at 950 nm is far above 500 nm,
//! while the contrast against surrounding skin fades.
//!
//!     cargo run --example band_montage

use std::error::Error;

use hyperderm::calib::{compute_reflectance, DEFAULT_EPSILON};
use hyperderm::cube::{band_montage, montage_default_wavelengths};
use hyperderm::skinsim::{render_references, render_scene, PhantomScene, RenderConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let scene = PhantomScene::demo(40, 40);
    let mut cfg = RenderConfig::standard();
    cfg.seed = 11;
    let rendered = render_scene(&scene, &cfg)?;
    let refs = render_references(40, 40, &cfg, 100)?;
    let (reflectance, _) = compute_reflectance(&rendered.cube, &refs, DEFAULT_EPSILON)?;

    let wavelengths = montage_default_wavelengths();
    let montage = band_montage(&reflectance, &wavelengths)?;
    println!(
        "montage grid: {} x {} tiles of {} px",
        montage.tile_rows,
        montage.tile_cols,
        montage.width / montage.tile_cols
    );
    for label in &montage.labels {
        println!(
            "  tile ({},{}) band {:>2}: requested {:>3.0} nm, centered {:>3.0} nm{}",
            label.tile_row,
            label.tile_col,
            label.band_index,
            label.requested_nm,
            label.center_nm,
            if label.out_of_range { " (out of range)" } else { "" }
        );
    }

    // Mean lesion reflectance at the blue-green end vs the NIR end.
    let mask = &rendered.truth.class_mask;
    let mean_over_lesion = |nm: f64| -> Result<f64, Box<dyn Error>> {
        let k = reflectance.band_map().nearest_band(nm).index;
        let plane = reflectance.band_slice(k)?;
        let (mut sum, mut n) = (0.0, 0u32);
        for (px, &v) in plane.iter().enumerate() {
            if mask[px] == 255 {
                sum += v;
                n += 1;
            }
        }
        Ok(sum / n as f64)
    };
    let at_500 = mean_over_lesion(500.0)?;
    let at_950 = mean_over_lesion(950.0)?;
    println!("lesion mean reflectance: {at_500:.3} at 500 nm, {at_950:.3} at 950 nm");
    assert!(
        at_950 > at_500,
        "melanin absorption must fall off toward the NIR"
    );

    let dir = std::env::temp_dir().join("hyperderm-band-montage");
    std::fs::create_dir_all(&dir)?;
    montage.write_pgm(&dir.join("montage.pgm"))?;
    montage.write_labels_json(&dir.join("montage_labels.json"))?;
    println!("wrote montage.pgm + montage_labels.json under {}", dir.display());
    Ok(())
}
