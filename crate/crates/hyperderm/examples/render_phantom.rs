//! Render a phantom scene into a raw hyperspectral capture.
//!
//! Builds a two-lesion scene by hand, renders it with shot and read noise,
//! and prints what the sensor saw: count ranges per region and where the
//! signal saturates the illumination. The raw cube, ground-truth
//! reflectance, and class mask are written next to each other the same way
//! the `simulate` subcommand lays them out.
//!
//!     cargo run --example render_phantom

use std::error::Error;

use hyperderm::cube::{encode_pgm, save_cube};
use hyperderm::skinsim::{
    render_scene, DermoscopicPattern, Histology, Lesion, LesionShape, PhantomScene, RenderConfig,
    SkinOpticsParams,
};

fn main() -> Result<(), Box<dyn Error>> {
    let mut scene = PhantomScene::uniform(48, 48, SkinOpticsParams::typical_skin());
    scene.lesions.push(Lesion {
        center_px: (17.0, 24.0),
        shape: LesionShape::Disc { radius_px: 9.0 },
        params: SkinOpticsParams::typical_lesion(),
        pattern: DermoscopicPattern::HomogeneousBrown,
        histology: Histology::Junctional,
    });
    scene.lesions.push(Lesion {
        center_px: (35.0, 24.0),
        shape: LesionShape::Annulus {
            inner_px: 3.0,
            outer_px: 7.0,
        },
        params: SkinOpticsParams {
            melanin_fraction: 0.15,
            ..SkinOpticsParams::typical_skin()
        },
        pattern: DermoscopicPattern::PeripheralNetwork,
        histology: Histology::Compound,
    });

    let mut cfg = RenderConfig::standard();
    cfg.seed = 42;
    let out = render_scene(&scene, &cfg)?;

    println!(
        "rendered {}x{} px, {} bands, seed {}",
        out.cube.rows(),
        out.cube.cols(),
        out.cube.bands(),
        cfg.seed
    );

    // Per-region count statistics at a green and an NIR band.
    for nm in [540.0, 950.0] {
        let k = out.cube.band_map().nearest_band(nm).index;
        let plane = out.cube.band_slice(k)?;
        let mut by_region: Vec<(f64, f64, u32)> =
            vec![(f64::INFINITY, f64::NEG_INFINITY, 0); out.truth.region_params.len()];
        for (px, &counts) in plane.iter().enumerate() {
            let r = out.truth.region_map[px] as usize;
            let entry = &mut by_region[r];
            entry.0 = entry.0.min(counts);
            entry.1 = entry.1.max(counts);
            entry.2 += 1;
        }
        println!("band {k} ({nm:.0} nm):");
        for (r, (lo, hi, n)) in by_region.iter().enumerate() {
            let name = if r == 0 { "background" } else { "lesion" };
            println!("  region {r} ({name}, {n} px): counts {lo:.0}..{hi:.0}");
        }
    }

    let lesion_px = out.truth.class_mask.iter().filter(|&&m| m == 255).count();
    println!("lesion covers {lesion_px} of {} px", 48 * 48);

    let dir = std::env::temp_dir().join("hyperderm-render-phantom");
    std::fs::create_dir_all(&dir)?;
    save_cube(&out.cube, &dir.join("raw.hsc"))?;
    let mask = encode_pgm(48, 48, &out.truth.class_mask)?;
    std::fs::write(dir.join("mask.pgm"), mask)?;
    std::fs::write(dir.join("scene.json"), scene.to_json())?;
    println!("wrote raw.hsc, mask.pgm, scene.json under {}", dir.display());
    Ok(())
}
