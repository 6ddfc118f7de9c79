//! The `HSC` container: a little-endian binary format for hypercubes.
//!
//! Layout, in order:
//!
//! ```text
//! magic        4 bytes  "HSC1"
//! version      u16      currently 1
//! domain       u8       0 = raw counts, 1 = reflectance
//! rows         u32
//! cols         u32
//! bands        u32
//! centers      f32 * bands   nm
//! fwhm         f32 * bands   nm
//! meta_len     u32
//! meta         meta_len bytes of UTF-8 JSON (CaptureMeta)
//! payload      u16 * rows*cols*bands   (raw counts)
//!              f32 * rows*cols*bands   (reflectance)
//! ```
//!
//! The payload is row-major with the band index innermost, exactly the
//! in-memory layout. Encoding is a pure function of the cube, so saving
//! the same cube twice produces byte-identical files.

use super::{BandMap, CaptureMeta, CubeData, CubeError, Domain, HyperCube};
use crate::fsio::write_atomic;
use std::fs;
use std::path::Path;

pub const HSC_MAGIC: [u8; 4] = *b"HSC1";
pub const HSC_VERSION: u16 = 1;

/// Serializes a cube to the `HSC` byte layout.
pub fn encode_cube(cube: &HyperCube) -> Result<Vec<u8>, CubeError> {
    // Cubes are validated at construction, but re-check reflectance
    // finiteness so no NaN can ever reach disk.
    if let CubeData::Reflectance(v) = cube.data() {
        for (i, &r) in v.iter().enumerate() {
            if !r.is_finite() {
                return Err(CubeError::NonFiniteValue { index: i });
            }
        }
    }
    let meta_json = serde_json::to_vec(cube.meta())
        .map_err(|e| CubeError::MalformedHeader(format!("meta serialization: {e}")))?;
    let n = cube.rows() * cube.cols() * cube.bands();
    let payload_width = match cube.domain() {
        Domain::RawCounts => 2,
        Domain::Reflectance => 4,
    };
    let mut out = Vec::with_capacity(23 + 8 * cube.bands() + meta_json.len() + n * payload_width);
    out.extend_from_slice(&HSC_MAGIC);
    out.extend_from_slice(&HSC_VERSION.to_le_bytes());
    out.push(cube.domain().to_byte());
    out.extend_from_slice(&(cube.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(cube.cols() as u32).to_le_bytes());
    out.extend_from_slice(&(cube.bands() as u32).to_le_bytes());
    for &c in cube.band_map().centers() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for &w in cube.band_map().fwhm() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);
    match cube.data() {
        CubeData::RawCounts(v) => {
            for &c in v {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        CubeData::Reflectance(v) => {
            for &r in v {
                out.extend_from_slice(&r.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CubeError> {
        if self.pos + n > self.buf.len() {
            return Err(CubeError::MalformedHeader(format!(
                "truncated while reading {what}: need {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8, CubeError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, CubeError> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32, CubeError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self, what: &str) -> Result<f32, CubeError> {
        let b = self.take(4, what)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parses a cube from `HSC` bytes, validating every invariant on the way in.
pub fn decode_cube(bytes: &[u8]) -> Result<HyperCube, CubeError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != HSC_MAGIC {
        return Err(CubeError::MalformedHeader(format!(
            "bad magic {:02x?}, expected \"HSC1\"",
            magic
        )));
    }
    let version = r.u16("version")?;
    if version != HSC_VERSION {
        return Err(CubeError::UnsupportedVersion(version));
    }
    let domain = Domain::from_byte(r.u8("domain")?)
        .ok_or_else(|| CubeError::MalformedHeader("unknown domain byte".into()))?;
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    let bands = r.u32("bands")? as usize;
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(CubeError::EmptyDimension);
    }
    let mut centers = Vec::with_capacity(bands);
    for _ in 0..bands {
        centers.push(r.f32("centers")?);
    }
    let mut fwhm = Vec::with_capacity(bands);
    for _ in 0..bands {
        fwhm.push(r.f32("fwhm")?);
    }
    let band_map = BandMap::new(centers, fwhm)?;
    let meta_len = r.u32("meta length")? as usize;
    let meta_bytes = r.take(meta_len, "meta json")?;
    let meta: CaptureMeta = serde_json::from_slice(meta_bytes)
        .map_err(|e| CubeError::MalformedHeader(format!("meta json: {e}")))?;
    let n = rows * cols * bands;
    let remaining = bytes.len() - r.pos;
    let data = match domain {
        Domain::RawCounts => {
            if remaining != 2 * n {
                return Err(CubeError::DimensionMismatch {
                    expected: 2 * n,
                    actual: remaining,
                });
            }
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(r.u16("payload")?);
            }
            CubeData::RawCounts(v)
        }
        Domain::Reflectance => {
            if remaining != 4 * n {
                return Err(CubeError::DimensionMismatch {
                    expected: 4 * n,
                    actual: remaining,
                });
            }
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(r.f32("payload")?);
            }
            CubeData::Reflectance(v)
        }
    };
    HyperCube::new(rows, cols, data, band_map, meta)
}

/// Writes a cube to `path` atomically (temp file + rename).
pub fn save_cube(cube: &HyperCube, path: &Path) -> Result<(), CubeError> {
    let bytes = encode_cube(cube)?;
    write_atomic(path, &bytes).map_err(|source| CubeError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a cube from `path`.
pub fn load_cube(path: &Path) -> Result<HyperCube, CubeError> {
    let bytes = fs::read(path).map_err(|source| CubeError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_cube(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{BodyPart, CaptureMeta, ReferenceRole};

    fn sample_cube(domain: Domain) -> HyperCube {
        let centers = vec![500.0f32, 512.5, 600.0];
        let fwhm = vec![8.0f32, 9.5, 11.0];
        let band_map = BandMap::new(centers, fwhm).unwrap();
        let meta = CaptureMeta {
            patient_id: "p007".into(),
            body_part: BodyPart::Torso,
            timestamp: "2024-03-01T10:30:00Z".into(),
            ..CaptureMeta::default()
        };
        let data = match domain {
            Domain::RawCounts => CubeData::RawCounts((0u16..24).collect()),
            Domain::Reflectance => {
                CubeData::Reflectance((0..24).map(|i| 0.01 + i as f32 * 0.05).collect())
            }
        };
        HyperCube::new(2, 4, data, band_map, meta).unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        for domain in [Domain::RawCounts, Domain::Reflectance] {
            let cube = sample_cube(domain);
            let bytes = encode_cube(&cube).unwrap();
            let back = decode_cube(&bytes).unwrap();
            assert_eq!(back, cube, "{domain:?} cube must survive a round trip");
        }
    }

    #[test]
    fn encoding_is_byte_deterministic() {
        let cube = sample_cube(Domain::Reflectance);
        assert_eq!(encode_cube(&cube).unwrap(), encode_cube(&cube).unwrap());
    }

    #[test]
    fn header_layout_is_fixed() {
        let cube = sample_cube(Domain::RawCounts);
        let bytes = encode_cube(&cube).unwrap();
        assert_eq!(&bytes[0..4], b"HSC1");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes[6], 0, "raw counts domain byte");
        assert_eq!(
            u32::from_le_bytes([bytes[7], bytes[8], bytes[9], bytes[10]]),
            2,
            "rows"
        );
        assert_eq!(
            u32::from_le_bytes([bytes[11], bytes[12], bytes[13], bytes[14]]),
            4,
            "cols"
        );
        assert_eq!(
            u32::from_le_bytes([bytes[15], bytes[16], bytes[17], bytes[18]]),
            3,
            "bands"
        );
        let c0 = f32::from_le_bytes([bytes[19], bytes[20], bytes[21], bytes[22]]);
        assert_eq!(c0, 500.0, "first center follows the dims");
    }

    #[test]
    fn reference_meta_keys_round_trip() {
        let mut cube = sample_cube(Domain::Reflectance);
        let mut meta = cube.meta().clone();
        meta.reference_role = Some(ReferenceRole::White);
        meta.frames_averaged = Some(100);
        cube = HyperCube::new(
            cube.rows(),
            cube.cols(),
            cube.data().clone(),
            cube.band_map().clone(),
            meta,
        )
        .unwrap();
        let bytes = encode_cube(&cube).unwrap();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        assert!(
            text.contains("\"reference_role\":\"white\""),
            "role must be embedded in the meta json"
        );
        let back = decode_cube(&bytes).unwrap();
        assert_eq!(back.meta().reference_role, Some(ReferenceRole::White));
        assert_eq!(back.meta().frames_averaged, Some(100));
    }

    #[test]
    fn bad_magic_is_malformed() {
        let cube = sample_cube(Domain::RawCounts);
        let mut bytes = encode_cube(&cube).unwrap();
        bytes[0] = b'X';
        assert!(matches!(
            decode_cube(&bytes),
            Err(CubeError::MalformedHeader(_))
        ));
    }

    #[test]
    fn future_version_is_rejected() {
        let cube = sample_cube(Domain::RawCounts);
        let mut bytes = encode_cube(&cube).unwrap();
        bytes[4] = 2;
        assert!(matches!(
            decode_cube(&bytes),
            Err(CubeError::UnsupportedVersion(2))
        ));
    }

    #[test]
    fn truncated_payload_is_dimension_mismatch() {
        let cube = sample_cube(Domain::RawCounts);
        let mut bytes = encode_cube(&cube).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(
            decode_cube(&bytes),
            Err(CubeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn truncated_header_is_malformed() {
        let cube = sample_cube(Domain::RawCounts);
        let bytes = encode_cube(&cube).unwrap();
        assert!(matches!(
            decode_cube(&bytes[..9]),
            Err(CubeError::MalformedHeader(_))
        ));
    }

    #[test]
    fn save_and_load_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.hsc");
        let cube = sample_cube(Domain::Reflectance);
        save_cube(&cube, &path).unwrap();
        let once = fs::read(&path).unwrap();
        save_cube(&cube, &path).unwrap();
        let twice = fs::read(&path).unwrap();
        assert_eq!(once, twice, "saving the same cube twice must be identical");
        assert_eq!(load_cube(&path).unwrap(), cube);
        assert!(
            !dir.path().join("sample.hsc.tmp").exists(),
            "temp file must be renamed away"
        );
    }

    #[test]
    fn missing_file_reports_io() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_cube(&dir.path().join("absent.hsc"));
        assert!(matches!(err, Err(CubeError::Io { .. })));
    }
}
