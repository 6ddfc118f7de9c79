//! Band montages: a grid of per-band grayscale tiles for visual review.

use super::pgm;
use super::{CubeError, HyperCube};
use crate::fsio::write_atomic;
use serde::Serialize;
use std::path::Path;

/// The review panel used for lesion work-ups: visible range in 50 nm steps
/// plus the 540/570 nm haemoglobin pair.
pub fn montage_default_wavelengths() -> Vec<f64> {
    vec![
        450.0, 500.0, 540.0, 570.0, 600.0, 650.0, 700.0, 750.0, 800.0, 850.0, 900.0, 950.0,
    ]
}

/// Where each requested wavelength landed in the montage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MontageLabel {
    pub requested_nm: f64,
    pub band_index: usize,
    pub center_nm: f64,
    pub tile_row: usize,
    pub tile_col: usize,
    pub out_of_range: bool,
}

/// A rendered montage: one min-max normalized 8-bit tile per requested
/// wavelength, laid out row-major on a near-square grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Montage {
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<MontageLabel>,
}

impl Montage {
    pub fn write_pgm(&self, path: &Path) -> Result<(), CubeError> {
        pgm::write_pgm(path, self.width, self.height, &self.pixels)
    }

    /// Label sidecar as pretty-printed JSON (stable field order).
    pub fn labels_json(&self) -> String {
        serde_json::to_string_pretty(&self.labels).expect("labels serialize")
    }

    pub fn write_labels_json(&self, path: &Path) -> Result<(), CubeError> {
        write_atomic(path, self.labels_json().as_bytes()).map_err(|source| CubeError::Io {
            path: path.to_owned(),
            source,
        })
    }
}

fn normalize_tile(plane: &[f64]) -> Vec<u8> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in plane {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    if !(range > 0.0) {
        // Constant tile: map everything to 0 rather than dividing by zero.
        return vec![0u8; plane.len()];
    }
    plane
        .iter()
        .map(|&v| (((v - lo) / range) * 255.0).round() as u8)
        .collect()
}

/// Builds a montage of the bands nearest each requested wavelength.
///
/// Tiles appear in the order the wavelengths were given, duplicates
/// included; each tile is min-max normalized independently so dim NIR
/// bands stay legible next to bright visible ones. Requests beyond the
/// grid clamp to the end band and are flagged in the labels rather than
/// rejected.
pub fn band_montage(cube: &HyperCube, wavelengths: &[f64]) -> Result<Montage, CubeError> {
    if wavelengths.is_empty() {
        return Err(CubeError::EmptyWavelengthList);
    }
    let n = wavelengths.len();
    let tile_cols = (n as f64).sqrt().ceil() as usize;
    let tile_rows = n.div_ceil(tile_cols);
    let width = tile_cols * cube.cols();
    let height = tile_rows * cube.rows();
    let mut pixels = vec![0u8; width * height];
    let mut labels = Vec::with_capacity(n);
    for (i, &nm) in wavelengths.iter().enumerate() {
        let hit = cube.band_map().nearest_band(nm);
        let plane = cube.band_slice(hit.index)?;
        let tile = normalize_tile(&plane);
        let tr = i / tile_cols;
        let tc = i % tile_cols;
        for r in 0..cube.rows() {
            let dst0 = (tr * cube.rows() + r) * width + tc * cube.cols();
            let src0 = r * cube.cols();
            pixels[dst0..dst0 + cube.cols()].copy_from_slice(&tile[src0..src0 + cube.cols()]);
        }
        labels.push(MontageLabel {
            requested_nm: nm,
            band_index: hit.index,
            center_nm: cube.band_map().center(hit.index)?,
            tile_row: tr,
            tile_col: tc,
            out_of_range: hit.out_of_range,
        });
    }
    Ok(Montage {
        tile_rows,
        tile_cols,
        width,
        height,
        pixels,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{BandMap, CaptureMeta, CubeData};

    fn ramp_cube() -> HyperCube {
        // 2x3 pixels, 4 bands at 500/510/520/530; band k holds value k at
        // pixel 0 and k+ pixel index elsewhere so tiles are non-constant.
        let band_map =
            BandMap::new(vec![500.0, 510.0, 520.0, 530.0], vec![8.0, 8.0, 8.0, 8.0]).unwrap();
        let mut data = vec![0u16; 2 * 3 * 4];
        for px in 0..6 {
            for k in 0..4 {
                data[px * 4 + k] = (10 * k + px) as u16;
            }
        }
        HyperCube::new(2, 3, CubeData::RawCounts(data), band_map, CaptureMeta::default()).unwrap()
    }

    #[test]
    fn tile_count_tracks_requests_with_duplicates() {
        let cube = ramp_cube();
        let m = band_montage(&cube, &[500.0, 510.0, 510.0, 530.0, 520.0]).unwrap();
        assert_eq!(m.labels.len(), 5);
        assert_eq!(m.tile_cols, 3);
        assert_eq!(m.tile_rows, 2);
        assert_eq!(m.width, 9);
        assert_eq!(m.height, 4);
        assert_eq!(m.labels[1].band_index, 1);
        assert_eq!(m.labels[2].band_index, 1, "duplicate keeps its own tile");
    }

    #[test]
    fn tiles_follow_input_order() {
        let cube = ramp_cube();
        let m = band_montage(&cube, &[530.0, 500.0]).unwrap();
        assert_eq!(m.labels[0].band_index, 3, "first tile is first request");
        assert_eq!(m.labels[0].tile_col, 0);
        assert_eq!(m.labels[1].band_index, 0);
        assert_eq!(m.labels[1].tile_col, 1);
    }

    #[test]
    fn normalization_is_per_tile_min_max() {
        let cube = ramp_cube();
        let m = band_montage(&cube, &[500.0]).unwrap();
        // Band 0 runs 0..=5 across six pixels: min -> 0, max -> 255.
        assert_eq!(m.pixels[0], 0);
        assert_eq!(*m.pixels.last().unwrap(), 255);
    }

    #[test]
    fn constant_tile_maps_to_zero() {
        let band_map = BandMap::new(vec![500.0], vec![8.0]).unwrap();
        let cube = HyperCube::new(
            2,
            2,
            CubeData::RawCounts(vec![7; 4]),
            band_map,
            CaptureMeta::default(),
        )
        .unwrap();
        let m = band_montage(&cube, &[500.0]).unwrap();
        assert!(m.pixels.iter().all(|&p| p == 0), "zero range maps to 0");
    }

    #[test]
    fn empty_request_list_is_rejected() {
        let cube = ramp_cube();
        assert!(matches!(
            band_montage(&cube, &[]),
            Err(CubeError::EmptyWavelengthList)
        ));
    }

    #[test]
    fn out_of_range_request_is_flagged_not_fatal() {
        let cube = ramp_cube();
        let m = band_montage(&cube, &[900.0]).unwrap();
        assert_eq!(m.labels[0].band_index, 3, "clamps to the red end");
        assert!(m.labels[0].out_of_range);
    }

    #[test]
    fn default_panel_covers_the_haemoglobin_pair() {
        let ws = montage_default_wavelengths();
        assert_eq!(ws.len(), 12);
        assert!(ws.contains(&540.0) && ws.contains(&570.0));
        assert_eq!(ws[0], 450.0);
        assert_eq!(*ws.last().unwrap(), 950.0);
    }
}
