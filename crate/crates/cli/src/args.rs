use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use planogram_core::eval::Stage;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "planogram", version, about = "Planogram compliance checking from product detections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic shelves: planogram, ground truth, detections and images.
    Simulate(SimulateArgs),
    /// Check one shelf image's detections against its planogram(s).
    Check(CheckArgs),
    /// Per-stage precision, recall and F-measure over a dataset manifest.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatcherKind {
    /// Simulator ground truth; needs --ground-truth.
    Oracle,
    /// Template matching; needs --scene and --templates.
    Zncc,
    /// Never proposes anything: every unmatched facing becomes an issue.
    None,
}

/// Pipeline parameters. Unset flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    /// Minimum hypothesis score for acceptance.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Edge length limit, as a multiple of the mean box diagonal.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Penalty per displaced pair of observed components.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub roi_margin: Option<f64>,
    #[arg(long)]
    pub accept_threshold: Option<f64>,
    #[arg(long)]
    pub overlap_iou_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Start from the evaluation benchmark settings (70 noisy scenes).
    #[arg(long)]
    pub benchmark: bool,
    /// Number of scenes; more than one writes a `scene_NNN` directory each.
    #[arg(long)]
    pub scenes: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Catalog size.
    #[arg(long)]
    pub products: Option<usize>,
    #[arg(long)]
    pub cell_w: Option<f64>,
    #[arg(long)]
    pub cell_h: Option<f64>,
    #[arg(long)]
    pub void_rate: Option<f64>,
    #[arg(long)]
    pub miss_rate: Option<f64>,
    #[arg(long)]
    pub fp_rate: Option<f64>,
    #[arg(long)]
    pub confusion_rate: Option<f64>,
    #[arg(long)]
    pub jitter_sigma: Option<f64>,
    #[arg(long)]
    pub category_size: Option<usize>,
    #[arg(long, env = "PLANOGRAM_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference planogram; repeat to localize the shelf among several.
    #[arg(long, required = true)]
    pub planogram: Vec<PathBuf>,
    #[arg(long)]
    pub detections: PathBuf,
    /// Shelf image (PGM) for template matching.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Directory of `<product>.pgm` templates.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Ground truth file for the oracle matcher.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Default: zncc with --scene, oracle with --ground-truth, else none.
    #[arg(long, value_enum)]
    pub matcher: Option<MatcherKind>,
    #[command(flatten)]
    pub params: PipelineFlags,
    /// Report path; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also draw matched items and issues as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest, as written by `simulate`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Default: oracle.
    #[arg(long, value_enum)]
    pub matcher: Option<MatcherKind>,
    /// Report a single stage instead of all three.
    #[arg(long)]
    pub stage: Option<Stage>,
    #[arg(long)]
    pub iou_threshold: Option<f64>,
    #[command(flatten)]
    pub params: PipelineFlags,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
