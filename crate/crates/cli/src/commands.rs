//! The batch commands, usable in-process as well as from the binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ornament_core::detect::{annotate, extract_fundamental_domain, extract_unit_cell};
use ornament_core::survey::io::{responses_from_str, tasks_from_json};
use ornament_core::survey::synthetic::{experiment1, experiment2};
use ornament_core::survey::{
    analyze, embedding_to_rgb, similarity_to_distance, tsne, AnalysisReport, DistanceMatrix, Embedding, Experiment,
    RgbMapping, SimilarityMatrix, TsneOptions, Unobserved,
};
use ornament_core::{classify_with, ClassifyOptions, RasterPattern, SymmetrySignature};

use crate::error::{CliError, CliResult};
use crate::job::parse_jobs;
use crate::plot;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn save_png(path: &Path, img: &image::RgbImage) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    img.save(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

/// Renders every job of a job file into `out_dir`; all group names are
/// checked before anything is written.
pub fn generate(job_file: &Path, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let jobs = parse_jobs(&read_text(job_file)?)?;
    for j in &jobs {
        j.group_name()?;
    }
    let base = job_file.parent().unwrap_or(Path::new("."));
    let mut written = Vec::new();
    for j in &jobs {
        let pattern = j.render(base)?;
        let path = out_dir.join(&j.output);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        pattern.save_png(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Default, Clone)]
pub struct ClassifyOutputs {
    /// Overlay of the detected centers and axes.
    pub annotate: Option<PathBuf>,
    /// Directory receiving `unit_cell.png` and `fundamental_domain.png`.
    pub extract: Option<PathBuf>,
}

pub fn classify(image: &Path, theta: Option<f64>, outputs: &ClassifyOutputs) -> CliResult<SymmetrySignature> {
    let pattern = RasterPattern::load_png(image)?;
    let mut opts = ClassifyOptions::default();
    if let Some(t) = theta {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Schema(format!("threshold must lie in (0, 1), got {t}")));
        }
        opts.theta = t;
    }
    let sig = classify_with(&pattern, &opts)?;
    if let Some(path) = &outputs.annotate {
        annotate(&pattern, &sig)?.save_png(path)?;
    }
    if let Some(dir) = &outputs.extract {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        extract_unit_cell(&pattern, &sig)?.save_png(dir.join("unit_cell.png"))?;
        extract_fundamental_domain(&pattern, &sig)?.image.save_png(dir.join("fundamental_domain.png"))?;
    }
    Ok(sig)
}

pub fn signature_json(sig: &SymmetrySignature) -> String {
    let mut s = serde_json::to_string_pretty(&sig.to_json()).expect("signature serializes");
    s.push('\n');
    s
}

/// Loads tasks and responses and runs the analysis of `experiment`
/// (inferred from the task modes when absent).
pub fn analyze_files(responses: &Path, tasks: &Path, experiment: Option<u8>) -> CliResult<AnalysisReport> {
    let tasks = tasks_from_json(&read_text(tasks)?)?;
    let responses = responses_from_str(&read_text(responses)?)?;
    let experiment = match experiment {
        Some(e) => Experiment::try_from(e)?,
        None => Experiment::infer(&tasks)?,
    };
    Ok(analyze(&tasks, &responses, experiment)?)
}

/// Writes the report's CSV and JSON files plus a PNG and SVG heatmap for
/// every matrix.
pub fn write_report(report: &AnalysisReport, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, text) in report.files() {
        let path = out_dir.join(&name);
        write_file(&path, text)?;
        written.push(path);
    }
    let mut heatmaps: Vec<(String, &[String], &[Vec<f64>])> = Vec::new();
    for (prefix, list) in [("participants", &report.participant_matrices), ("task", &report.per_task_matrices)] {
        for m in list {
            heatmaps.push((format!("{prefix}_{}", stem(&m.name)), &m.matrix.labels, &m.matrix.values));
        }
    }
    if let Some(s) = &report.similarity {
        heatmaps.push(("similarity".into(), &s.labels, &s.values));
    }
    let plots = out_dir.join("plots");
    for (name, labels, values) in heatmaps {
        let png = plots.join(format!("{name}.png"));
        save_png(&png, &plot::heatmap_png(values))?;
        let svg = plots.join(format!("{name}.svg"));
        write_file(&svg, plot::heatmap_svg(&name, labels, values))?;
        written.extend([png, svg]);
    }
    Ok(written)
}

fn stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// A distance matrix from a matrix CSV, a similarity matrix JSON, or an
/// analysis summary containing a similarity matrix.
pub fn load_distances(path: &Path, unobserved: Unobserved) -> CliResult<DistanceMatrix> {
    let text = read_text(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(DistanceMatrix::from_csv(&text)?);
    }
    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(inner) = v.get_mut("similarity").map(serde_json::Value::take) {
        v = inner;
    }
    let sim: SimilarityMatrix = serde_json::from_value(v)
        .map_err(|e| CliError::Schema(format!("{}: expected a similarity matrix: {e}", path.display())))?;
    Ok(similarity_to_distance(&sim, unobserved))
}

#[derive(Debug, Clone)]
pub struct EmbedOutput {
    pub embedding: Embedding,
    pub rgb: Option<RgbMapping>,
    pub files: Vec<PathBuf>,
}

/// Embeds the matrix and writes `embedding.csv`, `rgb.csv` (3D only) and
/// the scatter plots to `out_dir`.
pub fn embed(matrix: &Path, opts: &TsneOptions, unobserved: Unobserved, out_dir: &Path) -> CliResult<EmbedOutput> {
    if !(opts.dims == 2 || opts.dims == 3) {
        return Err(CliError::Schema(format!("dims must be 2 or 3, got {}", opts.dims)));
    }
    let d = load_distances(matrix, unobserved)?;
    let embedding = tsne(&d, opts)?;
    let mut files = Vec::new();
    let csv = out_dir.join("embedding.csv");
    write_file(&csv, embedding.to_csv())?;
    files.push(csv);
    let rgb = if opts.dims == 3 { Some(embedding_to_rgb(&embedding)?) } else { None };
    let colors: Option<Vec<[u8; 3]>> = rgb.as_ref().map(|m| m.colors.iter().map(|c| c.1).collect());
    if let Some(m) = &rgb {
        let path = out_dir.join("rgb.csv");
        write_file(&path, m.to_csv())?;
        files.push(path);
    }
    let png = out_dir.join("embedding.png");
    save_png(&png, &plot::scatter_png(&embedding.points, colors.as_deref()))?;
    let svg = out_dir.join("embedding.svg");
    let title = format!("tSNE, seed {}, KL {:.4}", embedding.seed, embedding.final_kl);
    write_file(&svg, plot::scatter_svg(&title, &embedding.labels, &embedding.points, colors.as_deref()))?;
    files.extend([png, svg]);
    Ok(EmbedOutput { embedding, rgb, files })
}

/// Writes `tasks.json` and `responses.jsonl` of a synthetic experiment.
pub fn synth(experiment: u8, seed: u64, inconsistent: usize, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let e = match Experiment::try_from(experiment)? {
        Experiment::One => experiment1(30, inconsistent, seed),
        Experiment::Two => experiment2(seed),
    };
    let tasks = out_dir.join("tasks.json");
    let mut text = serde_json::to_string_pretty(&BTreeMap::from([("tasks", &e.tasks.tasks)]))?;
    text.push('\n');
    write_file(&tasks, text)?;
    let responses = out_dir.join("responses.jsonl");
    write_file(&responses, ornament_core::survey::io::responses_to_jsonl(&e.responses))?;
    Ok(vec![tasks, responses])
}
