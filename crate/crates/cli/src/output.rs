//! Output writers and the JSON generator-spec schema.
//!
//! Every file written here embeds the resolved configuration and seed:
//! JSON outputs carry them as fields, CSV outputs as leading `#` comment
//! lines (which the CSV reader skips on the way back in). Nothing here
//! writes timestamps, so outputs are byte-identical across reruns.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use gen2out::axioms::{AxiomId, TTestResult};
use gen2out::data::{self, AffineMap, DataMatrix, IfsSpec};
use gen2out::detector::ModelFile;
use gen2out::tscloud::WindowScore;
use gen2out::xray::{DetectConfig, GeneralizedAnomalyReport, XRayPlot};
use gen2out::Seed;

/// JSON document accepted by `synth --spec`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Gaussian blob mixture.
    Blobs { centers: Vec<Vec<f64>>, stds: Vec<f64>, counts: Vec<usize> },
    /// Iterated function system played as a chaos game. `burn_in` defaults
    /// to 100.
    Ifs { maps: Vec<AffineMap>, weights: Vec<f64>, burn_in: Option<usize> },
}

impl GeneratorSpec {
    pub fn generate(&self, n: usize, seed: Seed) -> gen2out::Result<DataMatrix> {
        match self {
            GeneratorSpec::Blobs { centers, stds, counts } => {
                data::gen_gaussian_blobs(centers, stds, counts, seed)
            }
            GeneratorSpec::Ifs { maps, weights, burn_in } => {
                let mut spec = IfsSpec::new(maps.clone(), weights.clone())?;
                if let Some(b) = burn_in {
                    spec.burn_in = *b;
                }
                data::gen_ifs(&spec, n, seed)
            }
        }
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_matrix_csv(
    path: &Path,
    matrix: &DataMatrix,
    describe: &str,
    seed: u64,
) -> anyhow::Result<()> {
    let mut out = String::new();
    writeln!(out, "# gen2out synth: {describe}")?;
    writeln!(out, "# seed: {seed}")?;
    writeln!(out, "# rows: {} cols: {}", matrix.n_rows(), matrix.n_cols())?;
    for i in 0..matrix.n_rows() {
        let row = matrix.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}")?;
        }
        out.push('\n');
    }
    write(path, &out)
}

pub fn write_scores_csv(path: &Path, scores: &[f64], model: &ModelFile) -> anyhow::Result<()> {
    let mut out = String::new();
    writeln!(out, "# gen2out scores")?;
    writeln!(out, "# seed: {}", model.seed)?;
    writeln!(out, "# config: {}", serde_json::to_string(&model.config)?)?;
    writeln!(out, "point_index,score")?;
    for (i, s) in scores.iter().enumerate() {
        writeln!(out, "{i},{s}")?;
    }
    write(path, &out)
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    format_version: u32,
    seed: u64,
    config: &'a DetectConfig,
    #[serde(flatten)]
    report: &'a GeneralizedAnomalyReport,
}

pub fn write_report_json(
    path: &Path,
    report: &GeneralizedAnomalyReport,
    config: &DetectConfig,
    seed: u64,
) -> anyhow::Result<()> {
    let doc = ReportDocument { format_version: 1, seed, config, report };
    write(path, &serde_json::to_string_pretty(&doc)?)
}

pub fn write_xray_csv(
    path: &Path,
    xray: &XRayPlot,
    config: &DetectConfig,
    seed: u64,
) -> anyhow::Result<()> {
    let mut out = String::new();
    writeln!(out, "# gen2out xray")?;
    writeln!(out, "# seed: {seed}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(out, "point_index,qr,score")?;
    for i in 0..xray.n_points() {
        for (l, level) in xray.levels.iter().enumerate() {
            writeln!(out, "{i},{},{}", level.qr, xray.score(i, l))?;
        }
    }
    write(path, &out)
}

#[derive(Serialize)]
struct AxiomsDocument {
    seed: u64,
    trials: usize,
    alpha: f64,
    results: Vec<AxiomRow>,
}

#[derive(Serialize)]
struct AxiomRow {
    axiom: String,
    statistic: f64,
    p_value: f64,
    follows: bool,
}

pub fn write_axioms_json(
    path: &Path,
    rows: &[(AxiomId, TTestResult, bool)],
    trials: usize,
    alpha: f64,
    seed: u64,
) -> anyhow::Result<()> {
    let doc = AxiomsDocument {
        seed,
        trials,
        alpha,
        results: rows
            .iter()
            .map(|(axiom, r, pass)| AxiomRow {
                axiom: axiom.name().to_string(),
                statistic: r.statistic,
                p_value: r.p_value,
                follows: *pass,
            })
            .collect(),
    };
    write(path, &serde_json::to_string_pretty(&doc)?)
}

pub fn write_windows_csv(
    path: &Path,
    scores: &[WindowScore],
    config: &DetectConfig,
    seed: u64,
) -> anyhow::Result<()> {
    let mut out = String::new();
    writeln!(out, "# gen2out tscloud")?;
    writeln!(out, "# seed: {seed}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(out, "window_index,start_t,group_score,member_channels")?;
    for w in scores {
        let members: Vec<String> = w.member_channels.iter().map(usize::to_string).collect();
        writeln!(out, "{},{},{},{}", w.window_index, w.start_t, w.group_score, members.join(";"))?;
    }
    write(path, &out)
}

/// Write `lines` to `path`, or stdout when no path is given; a config/seed
/// comment header goes in front either way.
pub fn write_lines<C: Serialize>(
    path: Option<&Path>,
    config: &C,
    seed: u64,
    lines: &[String],
) -> anyhow::Result<()> {
    let mut out = String::new();
    writeln!(out, "# seed: {seed}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    match path {
        Some(p) => write(p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
