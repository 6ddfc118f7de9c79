//! Dataset bookkeeping: manifests, validation, and the pattern panel.
//!
//! Renders the nine-case dermoscopic pattern panel (each case its own
//! scene geometry), appends a record by hand the way `dataset add` does,
//! validates the result, and slices the records by pattern and by
//! histology to show the grouping the analysis layer works from.
//!
//!     cargo run --example dataset_workflow

use std::error::Error;

use hyperderm::analysis::{
    load_manifest, save_manifest, stratify, validate_manifest, AnnotatedRecord, PointAnnotation,
    StratifyKey,
};
use hyperderm::cube::BodyPart;
use hyperderm::skinsim::build_pattern_panel;

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join("hyperderm-dataset-workflow");
    let built = build_pattern_panel(&dir, 1)?;
    println!("panel: {} cases under {}", built.records.len(), dir.display());

    // Append a skin control point on the first panel cube, then reload.
    let mut records = load_manifest(&built.manifest_path)?;
    records.push(AnnotatedRecord {
        cube_path: records[0].cube_path.clone(),
        annotation: PointAnnotation::skin(2, 2),
        patient_id: records[0].patient_id.clone(),
        body_part: BodyPart::Arms,
        lesion_present: true,
    });
    save_manifest(&built.manifest_path, &records)?;
    let records = load_manifest(&built.manifest_path)?;

    let report = validate_manifest(&records);
    println!(
        "manifest: {} records, {} lesion-present, {} problems",
        report.total,
        report.lesion_present_count,
        report.problems.len()
    );
    assert!(report.is_clean());

    for key in [StratifyKey::Pattern, StratifyKey::Histology] {
        let groups = stratify(&records, key, &dir, 3)?;
        println!("{key:?} groups:");
        for (name, samples) in &groups {
            println!("  {name:<18} {} sample(s)", samples.len());
        }
    }
    println!("(the skin control point lands in 'Unlabeled' for both keys)");
    Ok(())
}
