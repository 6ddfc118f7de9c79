//! Command-line front end wiring the library together: simulate,
//! calibrate, analyze, montage, and dataset manifest management.
//!
//! Contract, shared by every subcommand:
//!
//! - Deterministic for fixed flags including `--seed` (default 0; never
//!   wall clock). Run a command twice into the same output directory and
//!   the bytes match.
//! - All results are computed before anything is written, and every write
//!   goes through an atomic temp-file rename, so a failing run leaves no
//!   partial outputs.
//! - Each run drops a `config.json` echoing its resolved flags next to
//!   its outputs.
//! - Exit codes: 0 success, 2 bad configuration (including flags clap
//!   rejects and unusable scene JSON), 3 input/output failure, 4 data
//!   invariant violation in cubes or manifests.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::analysis::{
    aggregate, class_contrast, export_csv, load_manifest, save_manifest, stratify,
    validate_manifest, AnalysisError, AnnotatedRecord, ClassLabel, GroupSpectrum,
    PointAnnotation, StatKind, StratifyKey, DEFAULT_PATCH_WINDOW,
};
use crate::calib::{
    compute_reflectance, validate_references, CalibError, ReferencePair, DEFAULT_EPSILON,
};
use crate::cube::{
    self, band_montage, encode_pgm, montage_default_wavelengths, BodyPart, CubeData, CubeError,
    HyperCube,
};
use crate::fsio;
use crate::plot::{write_spectra_svg, PlotError, PlotSeries};
use crate::skinsim::{
    render_references, render_scene, DermoscopicPattern, Histology, PhantomScene, RenderConfig,
    SimError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

fn from_cube(e: CubeError) -> CliError {
    match e {
        CubeError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

fn from_calib(e: CalibError) -> CliError {
    match e {
        CalibError::Cube(inner) => from_cube(inner),
        CalibError::NonPositiveEpsilon(_) => CliError::Config(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

/// During simulate, model errors trace back to the user's scene or flags.
fn from_sim(e: SimError) -> CliError {
    match e {
        SimError::Cube(CubeError::Io { .. }) => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn from_analysis(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::ManifestIo { .. } => CliError::Io(e.to_string()),
        AnalysisError::Cube(inner) => from_cube(inner),
        other => CliError::Data(other.to_string()),
    }
}

fn from_plot(e: PlotError) -> CliError {
    match e {
        PlotError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

fn io_err(context: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context} {}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fsio::write_atomic(path, bytes).map_err(|e| io_err("writing", path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err("creating directory", dir, e))
}

fn parse_body_part(s: &str) -> Result<BodyPart, String> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "hyperderm",
    version,
    about = "Hyperspectral dermatoscope toolkit: simulate captures, calibrate to reflectance, analyze annotated datasets, export band montages"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a phantom scene into a raw capture, reference stack averages, and ground truth
    Simulate(SimulateArgs),
    /// Convert a raw capture to reflectance against dark/white references
    Calibrate(CalibrateArgs),
    /// Group, aggregate, and plot spectra from an annotated manifest
    Analyze(AnalyzeArgs),
    /// Lay selected bands out as a labeled grayscale montage
    Montage(MontageArgs),
    /// Manage JSONL dataset manifests
    Dataset(DatasetArgs),
}

/// Parses process arguments, runs the subcommand, and returns the exit
/// code; the binary wraps this in `std::process::exit`.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command.execute() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl Command {
    fn execute(&self) -> Result<(), CliError> {
        match self {
            Command::Simulate(args) => cmd_simulate(args),
            Command::Calibrate(args) => cmd_calibrate(args),
            Command::Analyze(args) => cmd_analyze(args),
            Command::Montage(args) => cmd_montage(args),
            Command::Dataset(args) => cmd_dataset(args),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scene JSON file; omitted, a centered demo lesion is rendered
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Frame height when no scene file is given
    #[arg(long, default_value_t = 64)]
    rows: usize,
    /// Frame width when no scene file is given
    #[arg(long, default_value_t = 64)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Render exact expected counts instead of shot and read noise
    #[arg(long)]
    no_noise: bool,
    /// Reference frames averaged into the dark and white references
    #[arg(long, default_value_t = 100)]
    frames: u32,
    #[arg(long, default_value = "SIM001")]
    patient_id: String,
    #[arg(long, default_value = "other", value_parser = parse_body_part)]
    body_part: BodyPart,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let scene = match &args.scene {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err("reading", path, e))?;
            PhantomScene::from_json(&text)
                .map_err(|e| CliError::Config(format!("scene {}: {e}", path.display())))?
        }
        None => PhantomScene::demo(args.rows, args.cols),
    };

    let mut cfg = if args.no_noise {
        RenderConfig::noiseless()
    } else {
        RenderConfig::standard()
    };
    cfg.seed = args.seed;
    cfg.meta.patient_id = args.patient_id.clone();
    cfg.meta.body_part = args.body_part;

    let rendered = render_scene(&scene, &cfg).map_err(from_sim)?;
    let refs = render_references(scene.rows, scene.cols, &cfg, args.frames).map_err(from_sim)?;
    let (dark_cube, white_cube) = refs
        .to_cubes(rendered.cube.band_map(), &cfg.meta)
        .map_err(from_calib)?;

    let truth = &rendered.truth;
    let truth_values: Vec<f32> = truth.reflectance.data().iter().map(|&v| v as f32).collect();
    let truth_cube = HyperCube::new(
        scene.rows,
        scene.cols,
        CubeData::Reflectance(truth_values),
        rendered.cube.band_map().clone(),
        cfg.meta.clone(),
    )
    .map_err(from_cube)?;

    let mask_pgm =
        encode_pgm(scene.cols, scene.rows, &truth.class_mask).map_err(from_cube)?;
    let region_count = truth.region_params.len();
    let regions_pgm = if region_count <= 256 {
        let spread = 255 / (region_count.max(2) - 1);
        let shades: Vec<u8> = truth
            .region_map
            .iter()
            .map(|&r| (r as usize * spread) as u8)
            .collect();
        Some(encode_pgm(scene.cols, scene.rows, &shades).map_err(from_cube)?)
    } else {
        None
    };

    let lesion_pixels = truth.class_mask.iter().filter(|&&m| m == 255).count();
    let ground_truth_json = serde_json::to_vec_pretty(&json!({
        "region_params": truth.region_params,
        "region_count": region_count,
        "lesion_pixel_count": lesion_pixels,
        "reflectance_cube": "truth.hsc",
    }))
    .expect("json encodes");

    let config_json = serde_json::to_vec_pretty(&json!({
        "command": "simulate",
        "scene": args.scene.as_ref().map(|p| p.display().to_string()),
        "rows": scene.rows,
        "cols": scene.cols,
        "seed": args.seed,
        "noise": !args.no_noise,
        "frames": args.frames,
        "patient_id": args.patient_id,
        "body_part": args.body_part.to_string(),
        "out": args.out.display().to_string(),
    }))
    .expect("json encodes");

    ensure_dir(&args.out)?;
    let save = |name: &str, cube: &HyperCube| -> Result<(), CliError> {
        cube::save_cube(cube, &args.out.join(name)).map_err(from_cube)
    };
    save("raw.hsc", &rendered.cube)?;
    save("dark.hsc", &dark_cube)?;
    save("white.hsc", &white_cube)?;
    save("truth.hsc", &truth_cube)?;
    write_file(&args.out.join("mask.pgm"), &mask_pgm)?;
    if let Some(bytes) = regions_pgm {
        write_file(&args.out.join("regions.pgm"), &bytes)?;
    }
    write_file(&args.out.join("scene.json"), scene.to_json().as_bytes())?;
    write_file(&args.out.join("ground_truth.json"), &ground_truth_json)?;
    write_file(&args.out.join("config.json"), &config_json)?;

    println!(
        "simulated {}x{}x{} capture ({} lesion px) -> {}",
        scene.rows,
        scene.cols,
        rendered.cube.bands(),
        lesion_pixels,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct CalibrateArgs {
    /// Raw capture (HSC, counts domain)
    #[arg(long)]
    raw: PathBuf,
    /// Dark reference cube (averaged, role=dark)
    #[arg(long)]
    dark: PathBuf,
    /// White reference cube (averaged, role=white)
    #[arg(long)]
    white: PathBuf,
    /// Denominator floor in counts; cells with white-dark below it are
    /// zero-filled and counted as degenerate
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    if !(args.epsilon.is_finite() && args.epsilon > 0.0) {
        return Err(CliError::Config(format!(
            "epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    let load = |path: &Path| cube::load_cube(path).map_err(from_cube);
    let raw = load(&args.raw)?;
    let dark = load(&args.dark)?;
    let white = load(&args.white)?;
    let refs = ReferencePair::from_cubes(&dark, &white).map_err(from_calib)?;
    let reference_report = validate_references(&refs, args.epsilon).map_err(from_calib)?;
    let (reflectance, diagnostics) =
        compute_reflectance(&raw, &refs, args.epsilon).map_err(from_calib)?;

    let diagnostics_json = serde_json::to_vec_pretty(&json!({
        "calibration": diagnostics,
        "references": reference_report,
    }))
    .expect("json encodes");
    let config_json = serde_json::to_vec_pretty(&json!({
        "command": "calibrate",
        "raw": args.raw.display().to_string(),
        "dark": args.dark.display().to_string(),
        "white": args.white.display().to_string(),
        "epsilon": args.epsilon,
        "out": args.out.display().to_string(),
    }))
    .expect("json encodes");

    ensure_dir(&args.out)?;
    cube::save_cube(&reflectance, &args.out.join("reflectance.hsc")).map_err(from_cube)?;
    write_file(&args.out.join("diagnostics.json"), &diagnostics_json)?;
    write_file(&args.out.join("config.json"), &config_json)?;

    println!(
        "calibrated {}x{}x{}: {:.2}% saturated, {:.2}% degenerate -> {}",
        reflectance.rows(),
        reflectance.cols(),
        reflectance.bands(),
        100.0 * diagnostics.saturated_fraction,
        100.0 * diagnostics.degenerate_fraction,
        args.out.display()
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KeyArg {
    /// skin vs lesion
    Class,
    BodyPart,
    Patient,
    Pattern,
    Histology,
}

impl KeyArg {
    fn to_key(self) -> StratifyKey {
        match self {
            KeyArg::Class => StratifyKey::ClassLabel,
            KeyArg::BodyPart => StratifyKey::BodyPart,
            KeyArg::Patient => StratifyKey::PatientId,
            KeyArg::Pattern => StratifyKey::Pattern,
            KeyArg::Histology => StratifyKey::Histology,
        }
    }

    fn name(self) -> &'static str {
        match self {
            KeyArg::Class => "class",
            KeyArg::BodyPart => "body-part",
            KeyArg::Patient => "patient",
            KeyArg::Pattern => "pattern",
            KeyArg::Histology => "histology",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StatArg {
    Mean,
    Median,
    Std,
}

impl StatArg {
    fn to_stat(self) -> StatKind {
        match self {
            StatArg::Mean => StatKind::Mean,
            StatArg::Median => StatKind::Median,
            StatArg::Std => StatKind::Std,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSONL manifest of annotated records
    #[arg(long)]
    manifest: PathBuf,
    /// Field to group spectra by
    #[arg(long, value_enum, default_value_t = KeyArg::Class)]
    key: KeyArg,
    /// Per-band summary statistic
    #[arg(long, value_enum, default_value_t = StatArg::Median)]
    stat: StatArg,
    /// Patch edge in pixels; must be odd
    #[arg(long, default_value_t = DEFAULT_PATCH_WINDOW)]
    window: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    if args.window.is_multiple_of(2) || args.window == 0 {
        return Err(CliError::Config(format!(
            "window must be odd, got {}",
            args.window
        )));
    }
    let records = load_manifest(&args.manifest).map_err(from_analysis)?;
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "manifest {} has no records",
            args.manifest.display()
        )));
    }
    let report = validate_manifest(&records);
    if !report.is_clean() {
        for p in &report.problems {
            eprintln!("manifest problem: {p}");
        }
        return Err(CliError::Data(format!(
            "manifest {} failed validation with {} problem(s)",
            args.manifest.display(),
            report.problems.len()
        )));
    }

    let base_dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let stat = args.stat.to_stat();
    let groups =
        stratify(&records, args.key.to_key(), &base_dir, args.window).map_err(from_analysis)?;
    let mut aggregates = Vec::with_capacity(groups.len());
    for (name, samples) in &groups {
        let agg = aggregate(samples, stat).map_err(from_analysis)?;
        aggregates.push(GroupSpectrum {
            group: name.clone(),
            aggregate: agg,
        });
    }

    let csv = export_csv(&aggregates);
    let series: Vec<PlotSeries> = aggregates
        .iter()
        .map(|g| PlotSeries {
            label: g.group.clone(),
            wavelengths: g
                .aggregate
                .band_map
                .centers()
                .iter()
                .map(|&c| c as f64)
                .collect(),
            values: g.aggregate.values.clone(),
        })
        .collect();
    let title = format!("{stat} reflectance by {}", args.key.name());

    // Class analyses additionally quantify skin-lesion contrast.
    let contrast_json = if args.key == KeyArg::Class {
        let skin = aggregates
            .iter()
            .find(|g| g.group == ClassLabel::Skin.to_string());
        let lesion = aggregates
            .iter()
            .find(|g| g.group == ClassLabel::Lesion.to_string());
        match (skin, lesion) {
            (Some(s), Some(l)) => {
                let contrast =
                    class_contrast(&s.aggregate, &l.aggregate).map_err(from_analysis)?;
                Some(serde_json::to_vec_pretty(&contrast).expect("json encodes"))
            }
            _ => None,
        }
    } else {
        None
    };

    let config_json = serde_json::to_vec_pretty(&json!({
        "command": "analyze",
        "manifest": args.manifest.display().to_string(),
        "key": args.key.name(),
        "stat": stat.to_string(),
        "window": args.window,
        "records": report.total,
        "lesion_present": report.lesion_present_count,
        "out": args.out.display().to_string(),
    }))
    .expect("json encodes");

    ensure_dir(&args.out)?;
    write_file(&args.out.join("spectra.csv"), csv.as_bytes())?;
    write_spectra_svg(&args.out.join("spectra.svg"), &series, &title).map_err(from_plot)?;
    if let Some(bytes) = contrast_json {
        write_file(&args.out.join("contrast.json"), &bytes)?;
    }
    write_file(&args.out.join("config.json"), &config_json)?;

    println!(
        "analyzed {} records into {} group(s) by {} -> {}",
        report.total,
        groups.len(),
        args.key.name(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct MontageArgs {
    /// Input cube (HSC)
    #[arg(long)]
    cube: PathBuf,
    /// Comma-separated wavelengths in nm; omitted, 450-950 in 50 nm steps
    #[arg(long)]
    wavelengths: Option<String>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn parse_wavelengths(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let nm: f64 = token
            .parse()
            .map_err(|_| CliError::Config(format!("bad wavelength '{token}'")))?;
        out.push(nm);
    }
    if out.is_empty() {
        return Err(CliError::Config(
            "wavelength list is empty".into(),
        ));
    }
    Ok(out)
}

fn cmd_montage(args: &MontageArgs) -> Result<(), CliError> {
    let wavelengths = match &args.wavelengths {
        Some(text) => parse_wavelengths(text)?,
        None => montage_default_wavelengths(),
    };
    let cube = cube::load_cube(&args.cube).map_err(from_cube)?;
    let montage = band_montage(&cube, &wavelengths).map_err(from_cube)?;

    let config_json = serde_json::to_vec_pretty(&json!({
        "command": "montage",
        "cube": args.cube.display().to_string(),
        "wavelengths_nm": wavelengths,
        "out": args.out.display().to_string(),
    }))
    .expect("json encodes");

    ensure_dir(&args.out)?;
    montage
        .write_pgm(&args.out.join("montage.pgm"))
        .map_err(from_cube)?;
    montage
        .write_labels_json(&args.out.join("montage_labels.json"))
        .map_err(from_cube)?;
    write_file(&args.out.join("config.json"), &config_json)?;

    println!(
        "montage of {} band(s) -> {}",
        wavelengths.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct DatasetArgs {
    #[command(subcommand)]
    action: DatasetAction,
}

#[derive(Subcommand)]
enum DatasetAction {
    /// Append one annotated record to a manifest (creating it if absent)
    Add(DatasetAddArgs),
    /// Print every record and the dataset totals
    List {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Check manifest invariants and that referenced cubes exist
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Skin,
    Lesion,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PatternArg {
    DiffuseReticular,
    PeripheralNetwork,
    Globular,
    FriedEgg,
    HomogeneousBrown,
}

impl PatternArg {
    fn to_pattern(self) -> DermoscopicPattern {
        match self {
            PatternArg::DiffuseReticular => DermoscopicPattern::DiffuseReticular,
            PatternArg::PeripheralNetwork => DermoscopicPattern::PeripheralNetwork,
            PatternArg::Globular => DermoscopicPattern::Globular,
            PatternArg::FriedEgg => DermoscopicPattern::FriedEgg,
            PatternArg::HomogeneousBrown => DermoscopicPattern::HomogeneousBrown,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HistologyArg {
    Junctional,
    Compound,
    Dermal,
}

impl HistologyArg {
    fn to_histology(self) -> Histology {
        match self {
            HistologyArg::Junctional => Histology::Junctional,
            HistologyArg::Compound => Histology::Compound,
            HistologyArg::Dermal => Histology::Dermal,
        }
    }
}

#[derive(Args)]
struct DatasetAddArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Cube path as stored in the manifest (relative to the manifest)
    #[arg(long)]
    cube: String,
    /// Annotated pixel column
    #[arg(long)]
    x: u32,
    /// Annotated pixel row
    #[arg(long)]
    y: u32,
    #[arg(long, value_enum)]
    class: ClassArg,
    /// Dermoscopic pattern; lesion points only
    #[arg(long, value_enum)]
    pattern: Option<PatternArg>,
    /// Histological diagnosis; lesion points only
    #[arg(long, value_enum)]
    histology: Option<HistologyArg>,
    #[arg(long)]
    patient_id: String,
    #[arg(long, default_value = "other", value_parser = parse_body_part)]
    body_part: BodyPart,
    /// Mark the capture as containing a lesion even when this point
    /// samples skin; implied for lesion points
    #[arg(long)]
    lesion_present: bool,
}

fn cmd_dataset(args: &DatasetArgs) -> Result<(), CliError> {
    match &args.action {
        DatasetAction::Add(add) => dataset_add(add),
        DatasetAction::List { manifest } => dataset_list(manifest),
        DatasetAction::Validate { manifest } => dataset_validate(manifest),
    }
}

fn dataset_add(args: &DatasetAddArgs) -> Result<(), CliError> {
    if args.class == ClassArg::Skin && (args.pattern.is_some() || args.histology.is_some()) {
        return Err(CliError::Config(
            "--pattern/--histology describe a lesion; drop them for skin points".into(),
        ));
    }
    let annotation = match args.class {
        ClassArg::Skin => PointAnnotation::skin(args.x, args.y),
        ClassArg::Lesion => PointAnnotation::lesion(
            args.x,
            args.y,
            args.pattern.map(PatternArg::to_pattern),
            args.histology.map(HistologyArg::to_histology),
        ),
    };
    let record = AnnotatedRecord {
        cube_path: args.cube.clone(),
        annotation,
        patient_id: args.patient_id.clone(),
        body_part: args.body_part,
        lesion_present: args.lesion_present || args.class == ClassArg::Lesion,
    };
    let single = validate_manifest(std::slice::from_ref(&record));
    if !single.is_clean() {
        return Err(CliError::Data(format!(
            "record rejected: {}",
            single.problems.join("; ")
        )));
    }

    let mut records = if args.manifest.exists() {
        load_manifest(&args.manifest).map_err(from_analysis)?
    } else {
        if let Some(parent) = args.manifest.parent() {
            if !parent.as_os_str().is_empty() {
                ensure_dir(parent)?;
            }
        }
        Vec::new()
    };
    records.push(record);
    save_manifest(&args.manifest, &records).map_err(from_analysis)?;
    println!(
        "added record {} to {}",
        records.len(),
        args.manifest.display()
    );
    Ok(())
}

fn dataset_list(manifest: &Path) -> Result<(), CliError> {
    let records = load_manifest(manifest).map_err(from_analysis)?;
    for (i, r) in records.iter().enumerate() {
        let mut extras = String::new();
        if let Some(p) = r.annotation.pattern {
            extras.push_str(&format!(" pattern={p}"));
        }
        if let Some(h) = r.annotation.histology {
            extras.push_str(&format!(" histology={h}"));
        }
        println!(
            "{:>4} {:<6} {:<8} {:<8} ({:>3},{:>3}) {}{}",
            i + 1,
            r.annotation.class_label,
            r.patient_id,
            r.body_part,
            r.annotation.x,
            r.annotation.y,
            r.cube_path,
            extras
        );
    }
    let report = validate_manifest(&records);
    println!(
        "{} records, {} lesion-present",
        report.total, report.lesion_present_count
    );
    Ok(())
}

fn dataset_validate(manifest: &Path) -> Result<(), CliError> {
    let records = load_manifest(manifest).map_err(from_analysis)?;
    let mut report = validate_manifest(&records);
    let base_dir = manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    for (i, r) in records.iter().enumerate() {
        if !base_dir.join(&r.cube_path).exists() {
            report
                .problems
                .push(format!("line {}: cube file not found: {}", i + 1, r.cube_path));
        }
    }
    println!("records: {}", report.total);
    println!("lesion_present: {}", report.lesion_present_count);
    println!("skin_points: {}", report.skin_points);
    println!("lesion_points: {}", report.lesion_points);
    if report.is_clean() {
        println!("OK");
        Ok(())
    } else {
        for p in &report.problems {
            println!("problem: {p}");
        }
        Err(CliError::Data(format!(
            "{} problem(s) in {}",
            report.problems.len(),
            manifest.display()
        )))
    }
}
