//! From annotated cubes to aggregate spectra, CSV, and an SVG plot.
//!
//! Builds a small calibrated cohort on disk, groups the annotated points
//! by class, aggregates each group with a median, and exports the result
//! the same way the `analyze` subcommand does. Prints the skin-lesion
//! contrast and the NIR convergence ratio that motivates imaging past
//! 900 nm in the first place.
//!
//!     cargo run --example spectral_analysis

use std::error::Error;

use hyperderm::analysis::{
    aggregate, class_contrast, export_csv, stratify, GroupSpectrum, StatKind, StratifyKey,
};
use hyperderm::plot::{write_spectra_svg, PlotSeries};
use hyperderm::skinsim::{build_cohort, CohortPlan};

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join("hyperderm-spectral-analysis");
    let plan = CohortPlan {
        patients: 4,
        records: 24,
        lesion_records: 14,
        ..CohortPlan::standard()
    };
    let built = build_cohort(&plan, &dir)?;
    println!(
        "cohort: {} records over {} cubes under {}",
        built.records.len(),
        built.cube_files,
        dir.display()
    );

    let groups = stratify(&built.records, StratifyKey::ClassLabel, &dir, 3)?;
    let mut aggregates = Vec::new();
    for (name, samples) in &groups {
        println!("group '{name}': {} samples", samples.len());
        aggregates.push(GroupSpectrum {
            group: name.clone(),
            aggregate: aggregate(samples, StatKind::Median)?,
        });
    }

    let skin = &aggregates.iter().find(|g| g.group == "skin").unwrap().aggregate;
    let lesion = &aggregates.iter().find(|g| g.group == "lesion").unwrap().aggregate;
    let contrast = class_contrast(skin, lesion)?;
    let k550 = skin.band_map.nearest_band(550.0).index;
    let k950 = skin.band_map.nearest_band(950.0).index;
    println!(
        "skin - lesion: {:+.3} at 550 nm, {:+.3} at 950 nm (convergence ratio {:.2})",
        contrast.difference[k550], contrast.difference[k950], contrast.convergence_ratio
    );

    let csv = export_csv(&aggregates);
    std::fs::write(dir.join("spectra.csv"), &csv)?;
    println!("CSV: {} rows inc. header", csv.lines().count());

    let series: Vec<PlotSeries> = aggregates
        .iter()
        .map(|g| PlotSeries {
            label: g.group.clone(),
            wavelengths: g.aggregate.band_map.centers().iter().map(|&c| c as f64).collect(),
            values: g.aggregate.values.clone(),
        })
        .collect();
    write_spectra_svg(&dir.join("spectra.svg"), &series, "median reflectance by class")?;
    println!("wrote spectra.csv + spectra.svg under {}", dir.display());
    Ok(())
}
