//! Command-line driver.
//!
//! Subcommands: `aggregate`, `train-map`, `generate`, `eval`, `synth corpus`,
//! `synth vision`, `learn-dict`, `invert` and `split`. A global
//! `--config FILE` supplies `key=value` lines using the long flag names;
//! flags given on the command line take precedence.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error, 3 zero-shot
//! violation.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::aggregate::AggregationMethod;
use crate::crossmodal::Variant;
use crate::error::Error;
use crate::evalharness::Source;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ZERO_SHOT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dreamgen", version, about = "Generate images for words never seen with pictures")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file with defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collapse per-image vectors labelled `<concept>#<k>` into one per concept.
    Aggregate(AggregateArgs),
    /// Fit the word-to-visual mapping, optionally choosing lambdas by k-fold CV.
    TrainMap(TrainMapArgs),
    /// Render images for concepts through mapping and dictionary.
    Generate(GenerateArgs),
    /// Discrimination or macro-category evaluation of dreamed concepts.
    Eval(EvalArgs),
    /// Write synthetic datasets.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Learn a paired pixel/feature dictionary from images and their features.
    LearnDict(LearnDictArgs),
    /// Render a single visual vector.
    Invert(InvertArgs),
    /// Split the labels of a table into seen and dreamed lists.
    Split(SplitArgs),
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Words, visual vectors and the generating mapping.
    Corpus(SynthCorpusArgs),
    /// Smooth random images and their linear features.
    Vision(SynthVisionArgs),
}

#[derive(Debug, Clone, Args)]
struct GeometryArgs {
    /// Feature grid as HxW cells.
    #[arg(long, default_value = "6x6", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Features per cell.
    #[arg(long, default_value_t = 256)]
    cell_dim: usize,
    /// Cells per window side.
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Pixels per cell side.
    #[arg(long, default_value_t = 8)]
    ppc: usize,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    #[arg(long, value_parser = parse_from_str::<AggregationMethod>)]
    method: AggregationMethod,
    /// Instance table.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainMapArgs {
    #[arg(long, value_name = "FILE")]
    words: PathBuf,
    #[arg(long, value_name = "FILE")]
    visual: PathBuf,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value = "plain", value_parser = parse_from_str::<Variant>)]
    variant: Variant,
    #[arg(long, default_value_t = 0.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Comma-separated penalty strengths for cross-validation; each expands
    /// to the variant's (lambda1, lambda2).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CV report CSV (default: `<out>.cv.csv`).
    #[arg(long, value_name = "FILE")]
    cv_out: Option<PathBuf>,
    /// Labels (one per line) withheld from training.
    #[arg(long, value_name = "FILE")]
    holdout: Option<PathBuf>,
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Debug, Args)]
struct ConceptArgs {
    /// Comma-separated concepts.
    #[arg(long, value_delimiter = ',')]
    concepts: Option<Vec<String>>,
    /// Concepts, one per line.
    #[arg(long, value_name = "FILE")]
    concepts_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    dict: PathBuf,
    #[arg(long, value_name = "FILE")]
    words: Option<PathBuf>,
    /// Gold visual table to invert directly instead of mapping words.
    #[arg(long, value_name = "FILE")]
    gold: Option<PathBuf>,
    #[command(flatten)]
    concepts: ConceptArgs,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Render concepts that were part of the training data.
    #[arg(long)]
    allow_seen: bool,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum EvalMode {
    Random,
    Neighbor,
    Macro,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    mode: EvalMode,
    #[arg(long, default_value = "mapped", value_parser = parse_from_str::<Source>)]
    source: Source,
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    words: Option<PathBuf>,
    /// Gold visual table.
    #[arg(long, value_name = "FILE")]
    visual: PathBuf,
    /// Dictionary whose training labels must also exclude the dreamed set.
    #[arg(long, value_name = "FILE")]
    dict: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Dreamed concepts; default is every word/visual label the model did
    /// not train on.
    #[command(flatten)]
    concepts: ConceptArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Report CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthCorpusArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    d1: usize,
    #[arg(long, default_value_t = 50)]
    d2: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw words around three macro-category centres and write a catalog.
    #[arg(long)]
    clusters: bool,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SynthVisionArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Debug, Args)]
struct LearnDictArgs {
    /// Directory of `<label>.ppm` / `<label>.pgm` images.
    #[arg(long, value_name = "DIR")]
    images: PathBuf,
    /// Visual table with one row per image label.
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 128)]
    atoms: usize,
    #[arg(long, default_value_t = 4)]
    sparsity: usize,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Labels (one per line) withheld from training.
    #[arg(long, value_name = "FILE")]
    holdout: Option<PathBuf>,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long, value_name = "FILE")]
    dict: PathBuf,
    /// Table holding the visual vector.
    #[arg(long, value_name = "FILE")]
    vector: PathBuf,
    /// Row to render (default: the first).
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Table whose labels are split.
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    #[arg(long)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receives `seen.txt` and `dreamed.txt`.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not HxW"))?;
    let h = h.trim().parse().map_err(|e| format!("grid height: {e}"))?;
    let w = w.trim().parse().map_err(|e| format!("grid width: {e}"))?;
    Ok((h, w))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(Error::ZeroShot(_)) => EXIT_ZERO_SHOT,
            Failure::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(e) => write!(f, "{e}"),
        }
    }
}

/// Runs the command line `args` (including the program name) against the
/// process's stdout and stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(f) => {
            let _ = writeln!(err, "dreamgen: {f}");
            return f.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{}", e.render());
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return code;
        }
    };
    if let Some(path) = &cli.config {
        log::debug!("defaults from {}", path.display());
    }
    match commands::dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "dreamgen: {f}");
            f.exit_code()
        }
    }
}
