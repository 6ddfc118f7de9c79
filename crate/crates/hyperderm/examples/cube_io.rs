//! The HSC container: writing, reading, and byte-level determinism.
//!
//! Builds a small reflectance cube, saves it, reloads it, and re-encodes
//! it to show the format is bit-exact. Also walks the band map helpers:
//! the default 51-channel grid, nearest-band lookup with its out-of-range
//! flag, and the sensor's spatial sampling density.
//!
//!     cargo run --example cube_io

use std::error::Error;

use hyperderm::cube::{
    area_pixel_density, decode_cube, encode_cube, load_cube, save_cube, BandMap, CaptureMeta,
    CubeData, HyperCube, SENSOR_COLS, SENSOR_ROWS,
};

fn main() -> Result<(), Box<dyn Error>> {
    let band_map = BandMap::default_grid();
    println!(
        "default grid: {} channels, {:.0}-{:.0} nm, FWHM {:.0}->{:.0} nm",
        band_map.channel_count(),
        band_map.center(0)?,
        band_map.center(50)?,
        band_map.fwhm_at(0)?,
        band_map.fwhm_at(50)?
    );

    for nm in [545.0, 420.0, 980.0] {
        let hit = band_map.nearest_band(nm);
        println!(
            "nearest band to {nm:>5.0} nm: index {:>2} (center {:.0} nm){}",
            hit.index,
            band_map.center(hit.index)?,
            if hit.out_of_range { "  <- outside the grid" } else { "" }
        );
    }

    let density = area_pixel_density((SENSOR_ROWS, SENSOR_COLS), (20.0, 20.0))?;
    println!("sensor: {SENSOR_ROWS}x{SENSOR_COLS} px over 20x20 mm = {density:.2} px/mm^2");

    // A little gradient cube, written and read back.
    let (rows, cols, bands) = (4, 5, 51);
    let values: Vec<f32> = (0..rows * cols * bands)
        .map(|i| (i % 100) as f32 / 100.0)
        .collect();
    let meta = CaptureMeta {
        patient_id: "EXAMPLE".into(),
        ..CaptureMeta::default()
    };
    let cube = HyperCube::new(rows, cols, CubeData::Reflectance(values), band_map, meta)?;

    let dir = std::env::temp_dir().join("hyperderm-cube-io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("gradient.hsc");
    save_cube(&cube, &path)?;
    let bytes = std::fs::read(&path)?;
    println!("wrote {} ({} bytes)", path.display(), bytes.len());

    let reloaded = load_cube(&path)?;
    assert_eq!(reloaded, cube, "decode must invert encode");
    assert_eq!(
        encode_cube(&reloaded)?,
        bytes,
        "re-encoding must reproduce the file byte for byte"
    );
    assert_eq!(decode_cube(&bytes)?.value(2, 3, 17), cube.value(2, 3, 17));
    println!("round trip is exact, including a second encode of the loaded cube");
    Ok(())
}
