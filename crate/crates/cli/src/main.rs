//! Command-line driver: synthetic data, fitting, scoring, group detection,
//! axiom checks, ranking metrics, scaling benchmarks and time-series
//! featurization, all reproducible from one seed.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gen2out::axioms::{run_axiom_test, AxiomId, AxiomTestConfig};
use gen2out::data::{self, IfsSpec};
use gen2out::depth::{DepthAggregator, DepthFitConfig};
use gen2out::detector::{Detector, DetectorConfig, ModelFile};
use gen2out::eval::{evaluate_ranking, scaling_benchmark};
use gen2out::tscloud::{score_windows, windows_to_clouds, MultiSeries};
use gen2out::xray::{detect_with_xray, DetectConfig};
use gen2out::Seed;

const SEED_ENV: &str = "GEN2OUT_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "gen2out", version, about = "Generalized anomaly detection: points and groups")]
struct Cli {
    /// Cap on worker threads (0 = one per core). Results do not depend on
    /// this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV
    Synth(SynthArgs),
    /// Fit a point-anomaly detector and save the model
    Fit(FitArgs),
    /// Score a dataset with a saved model
    Score(ScoreArgs),
    /// Detect and rank point and group anomalies
    Detect(DetectArgs),
    /// Run the five-axiom statistical battery
    Axioms(AxiomsArgs),
    /// Evaluate ranking quality (AP, ROC-AUC) on labeled datasets
    Eval(EvalArgs),
    /// Measure fit+score wall time across dataset sizes
    Bench(BenchArgs),
    /// Featurize a multivariate series and score each window
    Tscloud(TscloudArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; falls back to $GEN2OUT_SEED, then 42. Echoed to outputs.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed
            .or_else(|| std::env::var(SEED_ENV).ok().and_then(|v| v.parse().ok()))
            .unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Args)]
struct DetectorArgs {
    #[arg(long, default_value_t = 100)]
    num_trees: usize,
    #[arg(long, default_value_t = 8)]
    depth_limit: usize,
    /// Smallest depth-fit sample size is 2^i_min
    #[arg(long, default_value_t = 8)]
    i_min: u32,
    #[arg(long, default_value_t = 5)]
    trees_per_size: usize,
    #[arg(long, value_enum, default_value_t = AggregatorArg::Mean)]
    aggregator: AggregatorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregatorArg {
    Mean,
    Mode,
}

impl DetectorArgs {
    fn to_config(&self) -> DetectorConfig {
        DetectorConfig {
            num_trees: self.num_trees,
            depth_limit: self.depth_limit,
            depth_fit: DepthFitConfig {
                i_min: self.i_min,
                trees_per_size: self.trees_per_size,
                aggregator: match self.aggregator {
                    AggregatorArg::Mean => DepthAggregator::Mean,
                    AggregatorArg::Mode => DepthAggregator::Mode,
                },
            },
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Named generator
    #[arg(long, value_enum, conflicts_with = "spec")]
    preset: Option<Preset>,
    /// JSON generator spec file (see README for the schema)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of points
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Single standard 2-D Gaussian blob
    Gaussian,
    /// Uniform on the segment (0,0)-(1,0)
    Line,
    /// Uniform in the unit square
    Square,
    /// Uniform in the unit disc
    Disc,
    /// Sierpinski triangle, equal weights
    Sierpinski,
    /// Sierpinski triangle, weights 0.6/0.3/0.1
    BiasedSierpinski,
    /// 80-20 biased line
    BiasedLine,
    /// Four-map fern
    Fern,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV
    #[arg(long)]
    input: PathBuf,
    /// Label column to strip before fitting (header name, or 0-based index)
    #[arg(long)]
    label_column: Option<String>,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output model path (JSON)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Model file from `fit`
    #[arg(long)]
    model: PathBuf,
    /// Input CSV to score
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    /// Output CSV (point_index, score)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Ladder stops before a level's sample falls below this
    #[arg(long, default_value_t = 256)]
    min_level_size: usize,
    /// Ladder never goes below qr = 2^-this
    #[arg(long, default_value_t = 10)]
    qr_floor_exp: u32,
    /// Grouping radius; default derives from nearest-neighbor distances
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 4)]
    min_pts: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Report JSON path
    #[arg(long)]
    report: PathBuf,
    /// Optional X-ray trajectories CSV (point_index, qr, score)
    #[arg(long)]
    xray: Option<PathBuf>,
}

impl DetectArgs {
    fn to_config(&self) -> DetectConfig {
        DetectConfig {
            detector: self.detector.to_config(),
            min_level_size: self.min_level_size,
            qr_floor_exp: self.qr_floor_exp,
            dbscan_eps: self.eps,
            dbscan_min_pts: self.min_pts,
        }
    }
}

#[derive(Args)]
struct AxiomsArgs {
    #[arg(long, default_value_t = 30)]
    trials: usize,
    /// Significance level for the pass/fail verdict
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Optional JSON output of the table
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Labeled CSV datasets
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Label column (header name, or 0-based index)
    #[arg(long, default_value = "label")]
    label_column: String,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output CSV (dataset, ap, roc_auc); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated dataset sizes
    #[arg(long, value_delimiter = ',', default_values_t = vec![4096usize, 8192, 16384, 32768, 65536, 131072, 262144])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output CSV (n, seconds); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TscloudArgs {
    /// CSV with one column per channel, one row per time step
    #[arg(long)]
    input: PathBuf,
    /// Window length in samples
    #[arg(long)]
    window: usize,
    /// Stride in samples
    #[arg(long)]
    stride: usize,
    /// Seconds per sample (metadata echoed to the output)
    #[arg(long, default_value_t = 1.0)]
    sample_interval: f64,
    /// Ladder minimum sized for per-window clouds
    #[arg(long, default_value_t = 16)]
    min_level_size: usize,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output CSV (window_index, start_t, group_score, member_channels)
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Thread count changes scheduling only, never results.
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth(args) => synth(args),
        Command::Fit(args) => fit(args),
        Command::Score(args) => score(args),
        Command::Detect(args) => run_detect(args),
        Command::Axioms(args) => axioms(args),
        Command::Eval(args) => eval(args),
        Command::Bench(args) => bench(args),
        Command::Tscloud(args) => tscloud(args),
    }
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let n = args.n;
    let (matrix, describe) = match (&args.preset, &args.spec) {
        (Some(preset), None) => {
            let m = match preset {
                Preset::Gaussian => {
                    data::gen_gaussian_blobs(&[vec![0.0, 0.0]], &[1.0], &[n], seed)?
                }
                Preset::Line => data::gen_uniform_line(n, seed),
                Preset::Square => data::gen_uniform_square(n, seed),
                Preset::Disc => data::gen_uniform_disc([0.0, 0.0], 1.0, n, seed),
                Preset::Sierpinski => {
                    data::gen_ifs(&IfsSpec::sierpinski([1.0 / 3.0; 3]), n, seed)?
                }
                Preset::BiasedSierpinski => {
                    data::gen_ifs(&IfsSpec::sierpinski([0.6, 0.3, 0.1]), n, seed)?
                }
                Preset::BiasedLine => data::gen_ifs(&IfsSpec::biased_line(0.8)?, n, seed)?,
                Preset::Fern => data::gen_ifs(&IfsSpec::fern(), n, seed)?,
            };
            (m, format!("preset={}", preset_name(*preset)))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read spec {}", path.display()))?;
            let spec: output::GeneratorSpec = serde_json::from_str(&text)
                .with_context(|| format!("invalid generator spec {}", path.display()))?;
            (spec.generate(n, seed)?, format!("spec={}", path.display()))
        }
        _ => bail!("exactly one of --preset or --spec is required"),
    };
    output::write_matrix_csv(&args.out, &matrix, &describe, seed.0)?;
    println!("wrote {} rows x {} cols to {}", matrix.n_rows(), matrix.n_cols(), args.out.display());
    Ok(())
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Gaussian => "gaussian",
        Preset::Line => "line",
        Preset::Square => "square",
        Preset::Disc => "disc",
        Preset::Sierpinski => "sierpinski",
        Preset::BiasedSierpinski => "biased-sierpinski",
        Preset::BiasedLine => "biased-line",
        Preset::Fern => "fern",
    }
}

fn fit(args: FitArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let matrix = data::load_csv(&args.input, args.label_column.as_deref())?;
    let config = args.detector.to_config();
    let detector = Detector::fit(&matrix, &config, seed)?;
    let file = ModelFile::new(detector, config, seed);
    std::fs::write(&args.out, file.to_json()?)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!(
        "fitted {} trees on {} rows; H(n) = {:.4} + {:.4} log2(n); model at {}",
        config.num_trees,
        matrix.n_rows(),
        file.detector.depth_model().w0,
        file.detector.depth_model().w1,
        args.out.display()
    );
    Ok(())
}

fn score(args: ScoreArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("cannot read model {}", args.model.display()))?;
    let file = ModelFile::from_json(&text)?;
    let matrix = data::load_csv(&args.input, args.label_column.as_deref())?;
    let scores = file.detector.score(&matrix)?;
    output::write_scores_csv(&args.out, &scores, &file)?;
    println!("scored {} rows to {}", scores.len(), args.out.display());
    Ok(())
}

fn run_detect(args: DetectArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let matrix = data::load_csv(&args.input, args.label_column.as_deref())?;
    let config = args.to_config();
    let (report, xray, _) = detect_with_xray(&matrix, &config, seed)?;
    output::write_report_json(&args.report, &report, &config, seed.0)?;
    if let Some(path) = &args.xray {
        output::write_xray_csv(path, &xray, &config, seed.0)?;
    }
    println!(
        "{} group(s), {} point anomal(ies), threshold {:.4}; report at {}",
        report.groups.len(),
        report.point_anomalies.len(),
        report.threshold,
        args.report.display()
    );
    Ok(())
}

fn axioms(args: AxiomsArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let config = AxiomTestConfig::default();
    let mut rows = Vec::new();
    println!("{:<14} {:>12} {:>14} {:>8}", "axiom", "statistic", "p_value", "verdict");
    for (k, axiom) in AxiomId::ALL.into_iter().enumerate() {
        let r = run_axiom_test(axiom, &config, args.trials, seed.derive(&[k as u64]))?;
        let pass = r.statistic > 0.0 && r.p_value < args.alpha;
        println!(
            "{:<14} {:>12.4} {:>14.3e} {:>8}",
            axiom.name(),
            r.statistic,
            r.p_value,
            if pass { "follows" } else { "FAILS" }
        );
        rows.push((axiom, r, pass));
    }
    if let Some(path) = &args.out {
        output::write_axioms_json(path, &rows, args.trials, args.alpha, seed.0)?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let config = args.detector.to_config();
    let mut lines = vec!["dataset,ap,roc_auc".to_string()];
    for input in &args.inputs {
        let matrix = data::load_csv(input, Some(&args.label_column))?;
        let labels = matrix
            .labels()
            .map(<[u8]>::to_vec)
            .with_context(|| format!("{} has no labels", input.display()))?;
        let detector = Detector::fit(&matrix, &config, seed)?;
        let scores = detector.score(&matrix)?;
        let ranking = evaluate_ranking(&scores, &labels)?;
        lines.push(format!("{},{},{}", input.display(), ranking.ap, ranking.roc_auc));
    }
    output::write_lines(args.out.as_deref(), &config, seed.0, &lines)?;
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let config = args.detector.to_config();
    let result = scaling_benchmark(
        &args.sizes,
        args.repeats,
        |n| data::gen_uniform_square(n, seed),
        |x| {
            let det = Detector::fit(x, &config, seed).expect("benchmark fit");
            let scores = det.score(x).expect("benchmark score");
            std::hint::black_box(scores.len());
        },
    )?;
    let mut lines = vec!["n,seconds".to_string()];
    for (n, t) in result.sizes.iter().zip(&result.wall_times) {
        lines.push(format!("{n},{t}"));
    }
    lines.push(format!("# loglog_slope: {:.4}", result.fitted_loglog_slope));
    output::write_lines(args.out.as_deref(), &config, seed.0, &lines)?;
    println!("log-log slope {:.4} over {} sizes", result.fitted_loglog_slope, args.sizes.len());
    Ok(())
}

fn tscloud(args: TscloudArgs) -> anyhow::Result<()> {
    let seed = Seed::new(args.seed.resolve());
    let matrix = data::load_csv(&args.input, None)?;
    let series = MultiSeries::from_matrix(&matrix, args.sample_interval)?;
    let clouds = windows_to_clouds(&series, args.window, args.stride)?;
    let config = DetectConfig {
        detector: args.detector.to_config(),
        min_level_size: args.min_level_size,
        ..DetectConfig::default()
    };
    let scores = score_windows(&clouds, &config, seed)?;
    output::write_windows_csv(&args.out, &scores, &config, seed.0)?;
    let loudest = scores.iter().max_by(|a, b| a.group_score.total_cmp(&b.group_score));
    if let Some(w) = loudest {
        println!(
            "{} windows; loudest window {} (start_t {}) with group score {:.4}",
            scores.len(),
            w.window_index,
            w.start_t,
            w.group_score
        );
    }
    Ok(())
}
