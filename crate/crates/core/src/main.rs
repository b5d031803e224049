use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use iem::cli::{cmd_evaluate, cmd_segment, cmd_synth, RunManifest, RunSettings};
use iem::{IemConfig, KernelSpec};

/// Unsupervised foreground/background segmentation by inpainting error
/// maximization.
#[derive(Parser)]
#[command(name = "iem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a folder of images and write masks, a CSV report, and a
    /// run manifest.
    Segment(SegmentArgs),
    /// Score predicted masks against ground-truth masks.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus with planted ground-truth masks.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ConfigFlags {
    /// Greedy update count per initialization.
    #[arg(long, env = "IEM_ITERATIONS", default_value_t = 150)]
    iterations: usize,

    /// Diversity regularizer strength.
    #[arg(long, env = "IEM_LAMBDA", default_value_t = 0.001)]
    lambda: f64,

    /// Gaussian kernel size (odd).
    #[arg(long, env = "IEM_KERNEL_SIZE", default_value_t = 21)]
    kernel_size: usize,

    /// Gaussian kernel scale.
    #[arg(long, env = "IEM_SIGMA", default_value_t = 5.0)]
    sigma: f64,

    /// Apply the kernel as two stacked half-size passes.
    #[arg(long, env = "IEM_STACKED", default_value_t = true, action = clap::ArgAction::Set)]
    stacked: bool,

    /// Comma-separated square initialization sizes.
    #[arg(long, env = "IEM_INIT_SIZES", default_value = "44,78,92", value_delimiter = ',')]
    init_sizes: Vec<usize>,

    /// Objective variant: l1-mask, l2-mask, l1-imgl1, or l2-imgl2.
    #[arg(long, env = "IEM_OBJECTIVE", default_value = "l1-mask")]
    objective: String,

    /// Disable the diversity regularizer.
    #[arg(long, env = "IEM_NO_REGULARIZER")]
    no_regularizer: bool,

    /// Disable mask smoothing after each update.
    #[arg(long, env = "IEM_NO_SMOOTHING")]
    no_smoothing: bool,

    /// Allow updates at every pixel instead of only boundary pixels.
    #[arg(long, env = "IEM_UNRESTRICTED_UPDATES")]
    unrestricted_updates: bool,

    /// Run all iterations even after reaching a fixed point.
    #[arg(long, env = "IEM_STRICT_ITERATIONS")]
    strict_iterations: bool,

    /// Denominator guard.
    #[arg(long, env = "IEM_EPSILON", default_value_t = 1e-8)]
    epsilon: f64,

    /// Square side images are resized and center-cropped to.
    #[arg(long, env = "IEM_TARGET_SIZE", default_value_t = 128)]
    target_size: usize,
}

impl ConfigFlags {
    fn to_settings(&self) -> anyhow::Result<RunSettings> {
        let kernel = if self.stacked {
            KernelSpec::stacked(self.kernel_size, self.sigma)?
        } else {
            KernelSpec::new(self.kernel_size, self.sigma)?
        };
        let config = IemConfig {
            kernel,
            lambda: self.lambda,
            variant: self.objective.parse()?,
            iterations: self.iterations,
            init_sizes: self.init_sizes.clone(),
            toggles: iem::Toggles {
                regularizer_on: !self.no_regularizer,
                smoothing_on: !self.no_smoothing,
                boundary_restricted: !self.unrestricted_updates,
            },
            epsilon: self.epsilon,
            strict_iterations: self.strict_iterations,
        };
        config.validate()?;
        Ok(RunSettings {
            config,
            target_size: self.target_size,
            jobs: 0,
            file_list: None,
        })
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Directory of input images (PNG or JPEG).
    #[arg(long, env = "IEM_INPUT")]
    input: PathBuf,

    /// Output directory for masks, report, and manifest.
    #[arg(long, env = "IEM_OUTPUT")]
    output: PathBuf,

    /// Worker threads for per-image parallelism (0 = all cores).
    #[arg(long, env = "IEM_JOBS", default_value_t = 0)]
    jobs: usize,

    /// Text file of stems restricting the inputs (one per line).
    #[arg(long, env = "IEM_FILE_LIST")]
    file_list: Option<PathBuf>,

    /// Load every hyperparameter from a previous run manifest; the
    /// config flags below are then ignored.
    #[arg(long, env = "IEM_FROM_MANIFEST")]
    from_manifest: Option<PathBuf>,

    #[command(flatten)]
    config: ConfigFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predicted masks (`<stem>_mask.png` or `<stem>.png`).
    #[arg(long, env = "IEM_INPUT")]
    input: PathBuf,

    /// Directory of ground-truth masks with matching stems.
    #[arg(long, env = "IEM_GT")]
    gt: PathBuf,

    /// Score each prediction and its complement, keeping the better.
    #[arg(long, env = "IEM_FLIP_SEARCH")]
    flip_search: bool,

    /// Text file of stems restricting the evaluation (one per line).
    #[arg(long, env = "IEM_FILE_LIST")]
    file_list: Option<PathBuf>,

    /// Write the per-image and aggregate CSV here instead of stdout.
    #[arg(long, env = "IEM_OUTPUT")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory; images land in `images/`, masks in `gt/`.
    #[arg(long, env = "IEM_OUTPUT")]
    output: PathBuf,

    /// Number of images to generate.
    #[arg(long, env = "IEM_COUNT", default_value_t = 50)]
    count: usize,

    /// Corpus seed; identical seeds reproduce the corpus byte for byte.
    #[arg(long, env = "IEM_SEED", default_value_t = 0)]
    seed: u64,

    /// Image side length.
    #[arg(long, env = "IEM_SIDE", default_value_t = 128)]
    side: usize,
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Segment(args) => {
            let mut settings = match &args.from_manifest {
                Some(path) => RunManifest::load(path)
                    .with_context(|| format!("loading manifest {}", path.display()))?
                    .to_settings()?,
                None => args.config.to_settings()?,
            };
            settings.jobs = args.jobs;
            settings.file_list = args.file_list.clone();
            let summary = cmd_segment(&args.input, &args.output, &settings)?;
            eprintln!(
                "segmented {} image(s), skipped {}; report at {}",
                summary.processed,
                summary.skipped,
                summary.csv_path.display()
            );
            Ok(())
        }
        Command::Evaluate(args) => {
            let summary = cmd_evaluate(
                &args.input,
                &args.gt,
                args.flip_search,
                args.file_list.as_deref(),
                args.output.as_deref(),
            )?;
            eprintln!(
                "evaluated {} pair(s): accuracy {:.4} IoU {:.4} DICE {:.4}",
                summary.pairs, summary.mean_accuracy, summary.mean_iou, summary.mean_dice
            );
            Ok(())
        }
        Command::Synth(args) => {
            if args.count == 0 {
                bail!("--count must be positive");
            }
            let n = cmd_synth(&args.output, args.count, args.seed, args.side)?;
            eprintln!("generated {n} image(s) under {}", args.output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
