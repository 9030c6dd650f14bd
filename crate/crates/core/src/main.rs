use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use noise_sieve::dataset::Dataset;
use noise_sieve::eval::{
    compare, kfold_plan, run_pipeline, Averaging, CompareConfig, FilterMode, NoiseScope, PipelineConfig,
};
use noise_sieve::ingest::{self, SegmentationConfig};
use noise_sieve::nbc::{SmoothingMode, SmoothingPolicy};
use noise_sieve::noise::{detect_noise, detect_noise_baseline, filter_dataset, NoiseConfig, NoiseReport, ScoreKind};
use noise_sieve::synth::{generate, inject_noise, GeneratorConfig};
use noise_sieve::tree::{build_tree, SplitCriterion, TreeConfig};

#[derive(Parser)]
#[command(name = "noise-sieve", version, about = "Naive-Bayes label-noise filtering for categorical data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw call log into a dataset CSV.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Segmentation JSON; defaults to S1 08-16, S2 16-24, S3 00-08.
        #[arg(long)]
        segments: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report noisy rows of a dataset.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Method::Dynamic)]
        method: Method,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Filter noise and train a decision tree; prints the tree as JSON.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Filter::Dynamic)]
        filter: Filter,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate one filter mode.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Filter::Dynamic)]
        filter: Filter,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validate no filtering, the all-misclassified baseline and the dynamic threshold.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate a rule-labelled dataset and inject label noise.
    Synth {
        /// Generator config JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise_rate: f64,
        /// Seed for noise injection (generation uses the config's seed).
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the flipped ids and original labels.
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as a raw call log instead of a dataset CSV.
    #[arg(long)]
    raw: bool,
    /// Segmentation JSON for --raw input.
    #[arg(long, requires = "raw")]
    segments: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = Smoothing::LaplaceOnZero)]
    smoothing: Smoothing,
    /// Laplace smoothing constant.
    #[arg(long, default_value_t = 1.0)]
    laplace_k: f64,
    #[arg(long, value_enum, default_value_t = Score::Likelihood)]
    score: Score,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    #[arg(long, value_enum, default_value_t = Criterion::GainRatio)]
    criterion: Criterion,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scope::PerFold)]
    filter_scope: Scope,
    #[arg(long, value_enum, default_value_t = Avg::Weighted)]
    averaging: Avg,
    /// Plain random folds instead of class-stratified ones.
    #[arg(long)]
    no_stratify: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dynamic,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    None,
    Baseline,
    Dynamic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Smoothing {
    LaplaceOnZero,
    LaplaceAlways,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum Score {
    Likelihood,
    Posterior,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    GainRatio,
    InfoGain,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    PerFold,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum Avg {
    #[value(alias = "w")]
    Weighted,
    Macro,
    Micro,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

enum Failure {
    /// Bad input or configuration: exit code 2.
    Input(String),
    /// Anything else: exit code 1.
    Internal(String),
}

impl From<noise_sieve::Error> for Failure {
    fn from(e: noise_sieve::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

impl From<Filter> for FilterMode {
    fn from(f: Filter) -> Self {
        match f {
            Filter::None => FilterMode::None,
            Filter::Baseline => FilterMode::Baseline,
            Filter::Dynamic => FilterMode::Dynamic,
        }
    }
}

impl NoiseArgs {
    fn config(&self) -> CliResult<NoiseConfig> {
        let mode = match self.smoothing {
            Smoothing::LaplaceOnZero => SmoothingMode::LaplaceOnZero,
            Smoothing::LaplaceAlways => SmoothingMode::LaplaceAlways,
            Smoothing::None => SmoothingMode::None,
        };
        let score = match self.score {
            Score::Likelihood => ScoreKind::Likelihood,
            Score::Posterior => ScoreKind::Posterior,
        };
        Ok(NoiseConfig {
            policy: SmoothingPolicy::new(mode, self.laplace_k)?,
            score,
        })
    }
}

impl TreeArgs {
    fn config(&self) -> CliResult<TreeConfig> {
        let criterion = match self.criterion {
            Criterion::GainRatio => SplitCriterion::GainRatio,
            Criterion::InfoGain => SplitCriterion::InfoGain,
        };
        Ok(TreeConfig::new(self.min_split, criterion)?)
    }
}

impl CvArgs {
    fn pipeline(&self, noise: NoiseConfig, tree: TreeConfig) -> PipelineConfig {
        PipelineConfig {
            noise,
            tree,
            averaging: match self.averaging {
                Avg::Weighted => Averaging::Weighted,
                Avg::Macro => Averaging::Macro,
                Avg::Micro => Averaging::Micro,
            },
            scope: match self.filter_scope {
                Scope::PerFold => NoiseScope::PerFold,
                Scope::Global => NoiseScope::Global,
            },
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_segments(path: Option<&Path>) -> CliResult<SegmentationConfig> {
    match path {
        Some(p) => Ok(SegmentationConfig::from_json(&read_text(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?),
        None => Ok(SegmentationConfig::default()),
    }
}

fn with_path(path: &Path, e: noise_sieve::Error) -> Failure {
    match e {
        noise_sieve::Error::Io { .. } => Failure::Input(e.to_string()),
        other => Failure::Input(format!("{}: {other}", path.display())),
    }
}

fn load_input(args: &InputArgs) -> CliResult<Dataset> {
    if args.raw {
        let segments = load_segments(args.segments.as_deref())?;
        let records = ingest::load_call_log(&args.input).map_err(|e| with_path(&args.input, e))?;
        Ok(ingest::to_dataset(&records, &segments).map_err(|e| with_path(&args.input, e))?)
    } else {
        ingest::load_dataset_csv(&args.input).map_err(|e| with_path(&args.input, e))
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn noise_markdown(report: &NoiseReport) -> String {
    let threshold = report
        .threshold
        .map_or_else(|| "none".to_string(), |t| format!("{t:.6e}"));
    let mut out = format!(
        "| Method | Threshold | Misclassified | Noise | Noise ids |\n|---|---|---|---|---|\n| {} | {} | {} | {} | {} |\n",
        serde_json::to_value(report.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        threshold,
        report.partition.mis.len(),
        report.noise_ids.len(),
        report.noise_ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
    );
    if let Some(w) = &report.warning {
        out.push_str(&format!("\nwarning: {w}\n"));
    }
    out
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest { input, segments, out } => {
            let segments = load_segments(segments.as_deref())?;
            let records = ingest::load_call_log(&input).map_err(|e| with_path(&input, e))?;
            let dataset = ingest::to_dataset(&records, &segments).map_err(|e| with_path(&input, e))?;
            let file = fs::File::create(&out)
                .map_err(|e| Failure::Internal(format!("{}: {e}", out.display())))?;
            ingest::write_dataset_csv(&dataset, std::io::BufWriter::new(file), false)
                .map_err(|e| Failure::Internal(e.to_string()))?;

            let mut summary = format!("rows: {}\n", dataset.len());
            for (label, count) in dataset.schema().class_labels().iter().zip(dataset.class_counts()) {
                summary.push_str(&format!("{label}: {count}\n"));
            }
            emit(&summary, None)
        }
        Command::Detect {
            input,
            method,
            noise,
            output,
        } => {
            let dataset = load_input(&input)?;
            let config = noise.config()?;
            let report = match method {
                Method::Dynamic => detect_noise(&dataset, config)?,
                Method::Baseline => detect_noise_baseline(&dataset, config)?,
            };
            if let Some(w) = &report.warning {
                log::warn!("{w}");
            }
            let text = match output.format {
                Format::Json => to_json(&report)?,
                Format::Markdown => noise_markdown(&report),
            };
            emit(&text, output.out.as_deref())
        }
        Command::Train {
            input,
            filter,
            noise,
            tree,
            out,
        } => {
            let dataset = load_input(&input)?;
            let noise = noise.config()?;
            let clean = match FilterMode::from(filter) {
                FilterMode::None => dataset,
                FilterMode::Baseline => filter_dataset(&dataset, &detect_noise_baseline(&dataset, noise)?)?,
                FilterMode::Dynamic => filter_dataset(&dataset, &detect_noise(&dataset, noise)?)?,
            };
            log::info!("training on {} rows", clean.len());
            let model = build_tree(&clean, tree.config()?)?;
            emit(&to_json(&model.root)?, out.as_deref())
        }
        Command::Evaluate {
            input,
            filter,
            cv,
            noise,
            tree,
            output,
        } => {
            let dataset = load_input(&input)?;
            let plan = kfold_plan(&dataset, cv.folds, cv.seed, !cv.no_stratify)?;
            let pipeline = cv.pipeline(noise.config()?, tree.config()?);
            let mode = FilterMode::from(filter);
            let result = run_pipeline(&dataset, mode, &plan, &pipeline)?;
            let text = match output.format {
                Format::Json => to_json(&result)?,
                Format::Markdown => {
                    let m = result.averaged;
                    format!(
                        "| Dataset/Method | Precision | Recall | F-measure |\n|---|---|---|---|\n| {} / {} | {:.2} | {:.2} | {:.2} |\n",
                        dataset_name(&input.input),
                        mode.display_name(),
                        m.precision,
                        m.recall,
                        m.f_measure
                    )
                }
            };
            emit(&text, output.out.as_deref())
        }
        Command::Compare {
            input,
            cv,
            noise,
            tree,
            output,
        } => {
            let dataset = load_input(&input)?;
            let config = CompareConfig {
                folds: cv.folds,
                seed: cv.seed,
                stratified: !cv.no_stratify,
                pipeline: cv.pipeline(noise.config()?, tree.config()?),
            };
            let report = compare(&dataset, &config)?;
            let text = match output.format {
                Format::Json => to_json(&report)?,
                Format::Markdown => report.to_markdown(&dataset_name(&input.input)),
            };
            emit(&text, output.out.as_deref())
        }
        Command::Synth {
            config,
            noise_rate,
            seed,
            out,
            truth,
        } => {
            let text = read_text(&config)?;
            let generator = GeneratorConfig::from_json(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let clean = generate(&generator)?;
            let (noisy, injection) = inject_noise(&clean, noise_rate, seed)?;

            let mut csv = Vec::new();
            ingest::write_dataset_csv(&noisy, &mut csv, true).map_err(|e| Failure::Internal(e.to_string()))?;
            emit(&String::from_utf8_lossy(&csv), Some(&out))?;
            emit(&to_json(&injection)?, Some(&truth))?;
            log::info!(
                "wrote {} rows to {} ({} flipped)",
                noisy.len(),
                out.display(),
                injection.flipped_ids.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NOISE_SIEVE_LOG", "warn"))
        .format_timestamp(None)
        .init();

    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
