//! Minimal binary PGM (P5) writer for masks and montages.

use super::CubeError;
use crate::fsio::write_atomic;
use std::path::Path;

/// Encodes an 8-bit grayscale image as binary PGM. `pixels` is row-major,
/// `width * height` long.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>, CubeError> {
    if width == 0 || height == 0 {
        return Err(CubeError::EmptyDimension);
    }
    if pixels.len() != width * height {
        return Err(CubeError::DimensionMismatch {
            expected: width * height,
            actual: pixels.len(),
        });
    }
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Writes a P5 PGM atomically.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<(), CubeError> {
    let bytes = encode_pgm(width, height, pixels)?;
    write_atomic(path, &bytes).map_err(|source| CubeError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload_layout() {
        let bytes = encode_pgm(3, 2, &[0, 10, 20, 30, 40, 250]).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 10, 20, 30, 40, 250]);
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(encode_pgm(3, 2, &[0; 5]).is_err());
        assert!(encode_pgm(0, 2, &[]).is_err());
    }
}
