use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "contour", version, about = "Contour detection with artificial training patterns")]
struct Cli {
    /// Worker threads: a positive count or `auto`.
    #[arg(long, global = true, env = "CONTOUR_THREADS", default_value = "auto")]
    threads: Threads,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pattern pairs of a schedule.
    Patterns {
        #[command(subcommand)]
        action: PatternsAction,
    },
    /// Per-pattern contour maps of one image.
    Detect(DetectArgs),
    /// Contour levels of one image.
    Levels(LevelsArgs),
    /// Precision/recall against ground-truth masks listed in a manifest.
    Eval(EvalArgs),
    /// Timing of the detection stack.
    Bench(BenchArgs),
    /// Predicate checks.
    Theory {
        #[command(subcommand)]
        action: TheoryAction,
    },
}

#[derive(Subcommand, Debug)]
enum PatternsAction {
    /// Write every (A, A') pair of the schedule plus an index.
    Gen(GenArgs),
}

#[derive(Subcommand, Debug)]
enum TheoryAction {
    /// Compare the closed-form predicate with the matcher on an intensity grid (CSV).
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    /// Smallest intensity step to resolve: 8 or 16.
    #[arg(long, default_value_t = 16)]
    pub delta_l: u32,
    /// Pattern set: 1 (dark background), 2 (bright background) or both.
    #[arg(long = "set", default_value = "1")]
    pub set: SetChoice,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// pgm: maps and overlays; ppm: overlays only; json: report only.
    #[arg(long, value_enum, default_value_t = Format::Pgm)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Side length of the pattern images.
    #[arg(long, default_value_t = 64)]
    pub canvas: usize,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Query image (PGM or PPM).
    pub image: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Neighbourhood size (odd). Artificial patterns support only 3.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Use a real exemplar image instead of the artificial schedule.
    #[arg(long, requires = "exemplar_mask")]
    pub exemplar: Option<PathBuf>,
    /// Contour marking of the exemplar (nonzero = contour).
    #[arg(long, requires = "exemplar")]
    pub exemplar_mask: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LevelsArgs {
    pub image: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Also write the mask of pixels at or above this level.
    #[arg(long, default_value_t = 1)]
    pub level_min: u32,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Text file of `image[,ground_truth]` lines, paths relative to the file.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Minimum contour level counted as a detection.
    #[arg(long, default_value_t = 1)]
    pub level_min: u32,
    /// Matching radius in pixels.
    #[arg(long, default_value_t = contour_core::eval::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// `detect` runs the detector on each image; `mask` reads the image as a finished prediction.
    #[arg(long, value_enum, default_value_t = PredSource::Detect)]
    pub pred: PredSource,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Image to time; a synthetic 481x321 scene when omitted.
    pub image: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Grid spacing in gray levels.
    #[arg(long, default_value_t = 8)]
    pub step: u8,
    /// First grid value.
    #[arg(long, default_value_t = 0)]
    pub offset: u8,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pgm,
    Ppm,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PredSource {
    Detect,
    Mask,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetChoice {
    One,
    Two,
    Both,
}

impl FromStr for SetChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1" | "set1" => Ok(SetChoice::One),
            "2" | "set2" => Ok(SetChoice::Two),
            "both" => Ok(SetChoice::Both),
            other => Err(format!("expected 1, 2 or both, got {other}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Threads {
    Auto,
    Count(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(format!("expected a positive thread count or `auto`, got {s}")),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Threads::Count(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building thread pool")?;
    pool.install(|| match cli.command {
        Command::Patterns {
            action: PatternsAction::Gen(args),
        } => commands::patterns_gen(&args),
        Command::Detect(args) => commands::detect(&args),
        Command::Levels(args) => commands::levels(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Bench(args) => {
            if args.repetitions == 0 {
                bail!("--repetitions must be at least 1");
            }
            commands::bench(&args)
        }
        Command::Theory {
            action: TheoryAction::Sweep(args),
        } => commands::theory_sweep(&args),
    })
}
