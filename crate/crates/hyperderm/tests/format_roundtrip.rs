//! Property tests for the persisted formats: the HSC cube container, the
//! JSONL annotation manifest, and the long-form CSV export. Strategies
//! generate arbitrary valid instances; the properties are exact round
//! trips and byte-level determinism.

use proptest::prelude::*;

use hyperderm::analysis::{
    export_csv, load_manifest, save_manifest, AggregateSpectrum, AnnotatedRecord, ClassLabel,
    GroupSpectrum, PointAnnotation, StatKind,
};
use hyperderm::cube::{
    decode_cube, encode_cube, BandMap, BodyPart, CaptureMeta, CubeData, HyperCube, ReferenceRole,
};
use hyperderm::skinsim::{DermoscopicPattern, Histology};

fn arb_band_map(bands: usize) -> impl Strategy<Value = BandMap> {
    (400.0f32..900.0, 0.5f32..10.0, 0.5f32..40.0).prop_map(move |(start, step, width)| {
        let centers: Vec<f32> = (0..bands).map(|k| start + step * k as f32).collect();
        let fwhm = vec![width; bands];
        BandMap::new(centers, fwhm).expect("strategy stays inside 400..1000 nm")
    })
}

fn arb_body_part() -> impl Strategy<Value = BodyPart> {
    prop::sample::select(vec![
        BodyPart::Arms,
        BodyPart::Legs,
        BodyPart::Face,
        BodyPart::Neck,
        BodyPart::Hands,
        BodyPart::Torso,
        BodyPart::Abdomen,
        BodyPart::Other,
    ])
}

fn arb_meta() -> impl Strategy<Value = CaptureMeta> {
    (
        (1.0f64..60.0, 1.0f64..60.0),
        1.0f64..40.0,
        "[A-Z0-9]{0,8}",
        arb_body_part(),
        prop::option::of(prop::sample::select(vec![
            ReferenceRole::Dark,
            ReferenceRole::White,
        ])),
        prop::option::of(1u32..500),
    )
        .prop_map(
            |(fov_mm, working_distance_mm, patient_id, body_part, reference_role, frames)| {
                CaptureMeta {
                    fov_mm,
                    working_distance_mm,
                    patient_id,
                    body_part,
                    timestamp: "1970-01-01T00:00:00Z".to_owned(),
                    reference_role,
                    frames_averaged: frames,
                }
            },
        )
}

fn arb_cube() -> impl Strategy<Value = HyperCube> {
    (1usize..=8, 1usize..=8, 1usize..=8)
        .prop_flat_map(|(rows, cols, bands)| {
            let cells = rows * cols * bands;
            let data = prop_oneof![
                prop::collection::vec(0u16..=4095, cells).prop_map(CubeData::RawCounts),
                prop::collection::vec(-2.0f32..3.0, cells).prop_map(CubeData::Reflectance),
            ];
            (Just(rows), Just(cols), data, arb_band_map(bands), arb_meta())
        })
        .prop_map(|(rows, cols, data, map, meta)| {
            HyperCube::new(rows, cols, data, map, meta).expect("strategy builds valid cubes")
        })
}

fn arb_record() -> impl Strategy<Value = AnnotatedRecord> {
    let pattern = prop::option::of(prop::sample::select(vec![
        DermoscopicPattern::FriedEgg,
        DermoscopicPattern::PeripheralNetwork,
        DermoscopicPattern::DiffuseReticular,
        DermoscopicPattern::Globular,
        DermoscopicPattern::HomogeneousBrown,
    ]));
    let histology = prop::option::of(prop::sample::select(vec![
        Histology::Junctional,
        Histology::Compound,
        Histology::Dermal,
    ]));
    (
        "[a-z0-9_/]{1,24}\\.hsc",
        (0u32..512, 0u32..512),
        any::<bool>(),
        pattern,
        histology,
        "[A-Z][0-9]{3}",
        arb_body_part(),
        any::<bool>(),
    )
        .prop_map(
            |(cube_path, (x, y), is_lesion, pattern, histology, patient_id, body_part, present)| {
                let annotation = if is_lesion {
                    PointAnnotation::lesion(x, y, pattern, histology)
                } else {
                    PointAnnotation::skin(x, y)
                };
                AnnotatedRecord {
                    cube_path,
                    annotation,
                    patient_id,
                    body_part,
                    // A lesion point implies a lesion in frame; skin points
                    // may go either way.
                    lesion_present: present || annotation.class_label == ClassLabel::Lesion,
                }
            },
        )
}

/// Unique group names, so CSV ordering is fully determined by content.
fn arb_groups() -> impl Strategy<Value = (Vec<GroupSpectrum>, Vec<GroupSpectrum>)> {
    prop::collection::btree_map("[a-z]{1,8}", 0.0f64..2.0, 1..6)
        .prop_flat_map(|by_name| {
            let map = BandMap::new(vec![500.0, 600.0, 700.0], vec![10.0; 3]).unwrap();
            let groups: Vec<GroupSpectrum> = by_name
                .into_iter()
                .map(|(group, v)| GroupSpectrum {
                    group,
                    aggregate: AggregateSpectrum {
                        values: vec![v, v + 0.125, v * 0.5],
                        n: 4,
                        band_map: map.clone(),
                        stat: StatKind::Median,
                    },
                })
                .collect();
            let shuffled = Just(groups.clone()).prop_shuffle();
            (Just(groups), shuffled)
        })
}

proptest! {
    #[test]
    fn decode_inverts_encode(cube in arb_cube()) {
        let bytes = encode_cube(&cube).unwrap();
        let back = decode_cube(&bytes).unwrap();
        prop_assert_eq!(&back, &cube);
    }

    #[test]
    fn encode_is_byte_stable(cube in arb_cube()) {
        let bytes = encode_cube(&cube).unwrap();
        let again = encode_cube(&decode_cube(&bytes).unwrap()).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn any_truncation_fails_to_decode(cube in arb_cube(), frac in 0.0f64..1.0) {
        let bytes = encode_cube(&cube).unwrap();
        let keep = (bytes.len() as f64 * frac) as usize;
        prop_assert!(keep < bytes.len());
        prop_assert!(decode_cube(&bytes[..keep]).is_err());
    }

    #[test]
    fn corrupted_magic_is_rejected(cube in arb_cube(), byte in 0usize..4) {
        let mut bytes = encode_cube(&cube).unwrap();
        bytes[byte] ^= 0xFF;
        prop_assert!(decode_cube(&bytes).is_err());
    }

    #[test]
    fn manifest_round_trips(records in prop::collection::vec(arb_record(), 0..12)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        save_manifest(&path, &records).unwrap();
        let back = load_manifest(&path).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn csv_export_ignores_input_order((original, shuffled) in arb_groups()) {
        prop_assert_eq!(export_csv(&original), export_csv(&shuffled));
    }
}
