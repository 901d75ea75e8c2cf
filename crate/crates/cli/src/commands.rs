use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clump_core::panel::{parse_truth_csv, write_long_csv, write_truth_csv};
use clump_core::study::{run_replications, write_records_jsonl};
use clump_core::{
    cluster_profiles, cut, euclidean_distances, extract_features, generate, parse_long_csv,
    run_timing, standardize, ward_dendrogram, Assignment, FeatureMatrix, IndexReport, MicroPanel,
    StudyConfig, StudySummary,
};

use crate::settings::{Settings, DEFAULT_BENCH_REPS, DEFAULT_SIZES, DEFAULT_STUDY_REPS, DEFAULT_T};

/// Paths a command read and wrote, for the manifest.
#[derive(Default)]
pub struct Outcome {
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: Vec<PathBuf>,
}

fn create(dir: &Path, name: &str, outcome: &mut Outcome) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    outcome.outputs.push(path);
    Ok(BufWriter::new(file))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn read_panel(path: &Path) -> Result<MicroPanel> {
    let (panel, report) =
        parse_long_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    eprintln!("{report}");
    if panel.is_empty() {
        bail!("{}: no valid trajectories", path.display());
    }
    Ok(panel)
}

pub fn extract(settings: &Settings) -> Result<Outcome> {
    let input = settings.require(&settings.input, "input")?;
    let mut outcome = Outcome::default();
    outcome.inputs.insert("input".into(), input.to_path_buf());
    let panel = read_panel(input)?;
    let features = standardize(&extract_features(&panel), settings.scale())?;
    let mut sink = create(&settings.out_dir(), "features.csv", &mut outcome)?;
    features.write_csv(&mut sink)?;
    sink.flush()?;
    Ok(outcome)
}

pub fn cluster(settings: &Settings) -> Result<Outcome> {
    let input = settings.require(&settings.input, "input")?;
    let k = settings.k()?;
    let mut outcome = Outcome::default();
    outcome.inputs.insert("input".into(), input.to_path_buf());
    let panel = read_panel(input)?;
    let raw = extract_features(&panel);
    let scaled = standardize(&raw, settings.scale())?;
    if k > scaled.len() {
        bail!("k = {k} exceeds the {} trajectories", scaled.len());
    }
    let tree = ward_dendrogram(&scaled)?;
    let assignment = cut(&tree, k)?;
    let profiles = cluster_profiles(&panel, &raw, &assignment)?;

    let dir = settings.out_dir();
    let mut sink = create(&dir, "assignments.csv", &mut outcome)?;
    assignment.write_csv(&mut sink)?;
    sink.flush()?;
    let mut sink = create(&dir, "dendrogram.json", &mut outcome)?;
    sink.write_all(tree.to_json()?.as_bytes())?;
    sink.flush()?;
    let mut sink = create(&dir, "profiles.json", &mut outcome)?;
    serde_json::to_writer_pretty(&mut sink, &profiles)?;
    sink.flush()?;
    Ok(outcome)
}

pub fn simulate(settings: &Settings) -> Result<Outcome> {
    let config = settings.scenario().resolve(settings.seed(), settings.t)?;
    let sim = generate(&config)?;
    let mut outcome = Outcome::default();
    let dir = settings.out_dir();
    let mut sink = create(&dir, "panel.csv", &mut outcome)?;
    write_long_csv(&sim.panel, &mut sink)?;
    sink.flush()?;
    let mut sink = create(&dir, "truth.csv", &mut outcome)?;
    write_truth_csv(&sim.panel, &mut sink)?;
    sink.flush()?;
    Ok(outcome)
}

pub fn evaluate(settings: &Settings) -> Result<Outcome> {
    let assignments_path = settings.require(&settings.assignments, "assignments")?;
    let truth_path = settings.require(&settings.truth, "truth")?;
    let features_path = settings.require(&settings.features, "features")?;
    let mut outcome = Outcome::default();
    outcome
        .inputs
        .insert("assignments".into(), assignments_path.to_path_buf());
    outcome
        .inputs
        .insert("truth".into(), truth_path.to_path_buf());
    outcome
        .inputs
        .insert("features".into(), features_path.to_path_buf());

    let assignment = Assignment::read_csv(open(assignments_path)?)
        .with_context(|| format!("reading {}", assignments_path.display()))?;
    let truth = parse_truth_csv(open(truth_path)?)
        .with_context(|| format!("reading {}", truth_path.display()))?;
    let features = FeatureMatrix::read_csv(open(features_path)?)
        .with_context(|| format!("reading {}", features_path.display()))?;

    // line every input up on the assignment's id order
    let row_of: HashMap<&str, usize> = features
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut truth_labels = Vec::with_capacity(assignment.len());
    let mut rows = Vec::with_capacity(assignment.len());
    for id in &assignment.ids {
        truth_labels.push(
            *truth
                .get(id)
                .with_context(|| format!("id {id} has no true cluster"))?,
        );
        let row = row_of
            .get(id.as_str())
            .with_context(|| format!("id {id} has no feature row"))?;
        rows.push(features.rows[*row]);
    }
    if truth.len() != assignment.len() || features.len() != assignment.len() {
        bail!(
            "{} assignments, {} truth labels and {} feature rows do not cover the same ids",
            assignment.len(),
            truth.len(),
            features.len()
        );
    }
    let aligned = standardize(
        &FeatureMatrix::new(assignment.ids.clone(), rows)?,
        settings.scale(),
    )?;
    let dist = euclidean_distances(&aligned)?;
    let report = IndexReport::evaluate(&truth_labels, &assignment.labels, &dist)?;

    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    let mut sink = create(&settings.out_dir(), "evaluation.json", &mut outcome)?;
    sink.write_all(json.as_bytes())?;
    sink.flush()?;
    Ok(outcome)
}

pub fn study(settings: &Settings) -> Result<Outcome> {
    let seed = settings.seed();
    let config = StudyConfig {
        scenario: settings.scenario().resolve(seed, settings.t)?,
        replications: settings.reps.unwrap_or(DEFAULT_STUDY_REPS),
        k: settings.k()?,
        scaling: settings.scale(),
        master_seed: seed,
    };
    let records = run_replications(&config)?;
    let summary = StudySummary::from_records(&config, &records);
    eprintln!(
        "{}: median adjusted Rand {} over {} replications",
        summary.scenario, summary.adjusted_rand.median, summary.replications
    );

    let mut outcome = Outcome::default();
    let dir = settings.out_dir();
    let mut sink = create(&dir, "summary.json", &mut outcome)?;
    serde_json::to_writer_pretty(&mut sink, &summary)?;
    sink.flush()?;
    let mut sink = create(&dir, "summary.csv", &mut outcome)?;
    summary.write_table_csv(&mut sink)?;
    sink.flush()?;
    let mut sink = create(&dir, "records.jsonl", &mut outcome)?;
    write_records_jsonl(&records, &mut sink)?;
    sink.flush()?;
    Ok(outcome)
}

pub fn bench(settings: &Settings) -> Result<Outcome> {
    let sizes = settings
        .sizes
        .clone()
        .unwrap_or_else(|| DEFAULT_SIZES.to_vec());
    let t = settings.t.unwrap_or(DEFAULT_T);
    let reps = settings.reps.unwrap_or(DEFAULT_BENCH_REPS);
    let report = run_timing(&sizes, t, reps, settings.seed())?;
    for row in &report.rows {
        eprintln!(
            "n = {}: extract {:.4} s, cluster {:.4} s",
            row.n, row.extract_seconds, row.cluster_seconds
        );
    }
    if report.rows.len() >= 2 {
        eprintln!(
            "log-log slope of clustering time: {:.3}",
            report.cluster_complexity_slope()
        );
    }
    let mut outcome = Outcome::default();
    let mut sink = create(&settings.out_dir(), "timing.json", &mut outcome)?;
    serde_json::to_writer_pretty(&mut sink, &report)?;
    sink.flush()?;
    Ok(outcome)
}
