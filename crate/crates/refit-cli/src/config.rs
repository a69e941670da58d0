//! Configuration: a TOML file of `key = value` sections plus CLI flag
//! overrides, resolved into validated pipeline parameters.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use refit::boundary_fit::{ConflictRule, ThresholdPolicy};
use refit::metrics::AbsentClass;
use refit::superpixels::{Algo, MergeParams, QuickshiftParams, SearchSpace, SlicParams};

use crate::CmdError;

#[derive(Debug, Parser)]
#[command(
    name = "refit",
    version,
    about = "Superpixel edge maps, response-map refinement and mask evaluation"
)]
pub struct CliArgs {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Superpixel algorithm: slic or quickshift
    #[arg(long, global = true)]
    pub algo: Option<String>,

    /// SLIC superpixel count
    #[arg(long, global = true)]
    pub k: Option<u32>,

    /// SLIC color/space balance
    #[arg(long, global = true)]
    pub compactness: Option<f64>,

    /// Quickshift density bandwidth
    #[arg(long = "kernel-size", global = true)]
    pub kernel_size: Option<f64>,

    /// Quickshift maximum parent-link length
    #[arg(long = "max-dist", global = true)]
    pub max_dist: Option<f64>,

    /// Quickshift color weight in (0,1]
    #[arg(long, global = true)]
    pub ratio: Option<f64>,

    /// Mean-color distance below which adjacent regions merge
    #[arg(long = "merge-threshold", global = true)]
    pub merge_threshold: Option<f64>,

    /// Response binarization threshold in (0,1)
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// Threshold mode: abs or rel
    #[arg(long = "threshold-mode", global = true)]
    pub threshold_mode: Option<String>,

    /// Treat the image border as a closing edge: on or off
    #[arg(long = "border-edge", global = true)]
    pub border_edge: Option<String>,

    /// Multi-class conflict rule: argmax or first
    #[arg(long, global = true)]
    pub conflict: Option<String>,

    /// Worker thread count; 0 uses all cores
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Seed for the search image sample
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (or file for overlay)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Input image directory
    #[arg(long, global = true)]
    pub images: Option<PathBuf>,

    /// Response-map (RFM) directory
    #[arg(long, global = true)]
    pub cams: Option<PathBuf>,

    /// Ground-truth mask directory
    #[arg(long, global = true)]
    pub gts: Option<PathBuf>,

    /// Overlay fill opacity
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Write a superpixel label map per input image
    Superpix,
    /// Refine response maps against superpixel edge maps
    Refine,
    /// Evaluate predicted masks against ground truths
    Eval {
        pred_dir: PathBuf,
        gt_dir: PathBuf,
    },
    /// Grid-search superpixel hyperparameters on a seeded image sample
    Search,
    /// Render mask fills and contours over an image
    Overlay {
        /// Base image
        #[arg(long)]
        image: PathBuf,
        /// Mask PNGs, one palette color each
        #[arg(required = true)]
        masks: Vec<PathBuf>,
    },
}

/// Resolved subcommand passed to the command layer.
#[derive(Debug)]
pub enum Command {
    Superpix,
    Refine,
    Eval { pred_dir: PathBuf, gt_dir: PathBuf },
    Search,
    Overlay {
        image: PathBuf,
        masks: Vec<PathBuf>,
        out: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    pipeline: PipelineSection,
    #[serde(default)]
    paths: PathsSection,
    #[serde(default)]
    slic: SlicSection,
    #[serde(default)]
    quickshift: QuickshiftSection,
    #[serde(default)]
    merge: MergeSection,
    #[serde(default)]
    threshold: ThresholdSection,
    #[serde(default)]
    search: SearchSection,
    #[serde(default)]
    overlay: OverlaySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineSection {
    algo: Option<String>,
    border_is_edge: Option<bool>,
    conflict: Option<String>,
    workers: Option<usize>,
    seed: Option<u64>,
    /// mIoU rule for classes absent from both sides: score_one or skip
    absent_class: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsSection {
    images: Option<PathBuf>,
    cams: Option<PathBuf>,
    gts: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlicSection {
    k: Option<u32>,
    compactness: Option<f64>,
    iterations: Option<u32>,
    enforce_connectivity: Option<bool>,
    min_region_frac: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuickshiftSection {
    kernel_size: Option<f64>,
    max_dist: Option<f64>,
    ratio: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MergeSection {
    color_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSection {
    mode: Option<String>,
    value: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchSection {
    k: Option<Vec<u32>>,
    compactness: Option<Vec<f64>>,
    kernel_size: Option<Vec<f64>>,
    max_dist: Option<Vec<f64>>,
    ratio: Option<Vec<f64>>,
    color_threshold: Option<Vec<f64>>,
    sample_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverlaySection {
    alpha: Option<f64>,
}

/// Fully resolved, validated pipeline configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub algo: Algo,
    pub slic: SlicParams,
    pub quickshift: QuickshiftParams,
    pub merge: MergeParams,
    pub policy: ThresholdPolicy,
    pub border_is_edge: bool,
    pub conflict: ConflictRule,
    pub images_dir: Option<PathBuf>,
    pub cams_dir: Option<PathBuf>,
    pub gts_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub absent_class: AbsentClass,
    pub search: SearchSpace,
    pub overlay_alpha: f64,
}

fn bad(msg: impl std::fmt::Display) -> CmdError {
    CmdError::Config(msg.to_string())
}

/// Merges defaults, the config file and CLI flags (highest precedence)
/// into a validated configuration.
pub fn build(cli: &CliArgs) -> Result<(PipelineConfig, Command), CmdError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| bad(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let algo: Algo = cli
        .algo
        .clone()
        .or(file.pipeline.algo)
        .unwrap_or_else(|| "slic".into())
        .parse()
        .map_err(bad)?;

    let slic_k = cli.k.or(file.slic.k).unwrap_or(100);
    let slic_compactness = cli.compactness.or(file.slic.compactness).unwrap_or(10.0);
    let mut slic = SlicParams::new(slic_k, slic_compactness)
        .map_err(bad)?
        .with_iterations(file.slic.iterations.unwrap_or(10))
        .map_err(bad)?
        .with_enforce_connectivity(file.slic.enforce_connectivity.unwrap_or(true));
    if let Some(frac) = file.slic.min_region_frac {
        slic = slic.with_min_region_frac(frac).map_err(bad)?;
    }

    let quickshift = QuickshiftParams::new(
        cli.kernel_size.or(file.quickshift.kernel_size).unwrap_or(2.0),
        cli.max_dist.or(file.quickshift.max_dist).unwrap_or(4.0),
        cli.ratio.or(file.quickshift.ratio).unwrap_or(1.0),
    )
    .map_err(bad)?;

    let merge = MergeParams::new(
        cli.merge_threshold
            .or(file.merge.color_threshold)
            .unwrap_or(0.0),
    )
    .map_err(bad)?;

    let mode = cli
        .threshold_mode
        .clone()
        .or(file.threshold.mode)
        .unwrap_or_else(|| "abs".into());
    let value = cli.threshold.or(file.threshold.value).unwrap_or(0.5);
    let policy = match mode.as_str() {
        "abs" | "absolute" => ThresholdPolicy::absolute(value).map_err(bad)?,
        "rel" | "relative" => ThresholdPolicy::relative(value).map_err(bad)?,
        other => return Err(bad(format!("unknown threshold mode {other:?}"))),
    };

    let border_is_edge = match cli.border_edge.as_deref() {
        Some("on") => true,
        Some("off") => false,
        Some(other) => return Err(bad(format!("--border-edge expects on or off, got {other:?}"))),
        None => file.pipeline.border_is_edge.unwrap_or(true),
    };

    let conflict = match cli
        .conflict
        .clone()
        .or(file.pipeline.conflict)
        .unwrap_or_else(|| "argmax".into())
        .as_str()
    {
        "argmax" => ConflictRule::Argmax,
        "first" => ConflictRule::First,
        other => return Err(bad(format!("unknown conflict rule {other:?}"))),
    };

    let absent_class = match file
        .pipeline
        .absent_class
        .as_deref()
        .unwrap_or("score_one")
    {
        "score_one" => AbsentClass::ScoreOne,
        "skip" => AbsentClass::Skip,
        other => return Err(bad(format!("unknown absent_class rule {other:?}"))),
    };

    let defaults = SearchSpace::default();
    let search = SearchSpace {
        k: file.search.k.unwrap_or(defaults.k),
        compactness: file.search.compactness.unwrap_or(defaults.compactness),
        kernel_size: file.search.kernel_size.unwrap_or(defaults.kernel_size),
        max_dist: file.search.max_dist.unwrap_or(defaults.max_dist),
        ratio: file.search.ratio.unwrap_or(defaults.ratio),
        color_threshold: file
            .search
            .color_threshold
            .unwrap_or(defaults.color_threshold),
        sample_size: file.search.sample_size.unwrap_or(defaults.sample_size),
    };

    let overlay_alpha = cli.alpha.or(file.overlay.alpha).unwrap_or(0.4);
    if !(0.0..=1.0).contains(&overlay_alpha) {
        return Err(bad(format!(
            "overlay alpha must be in [0,1], got {overlay_alpha}"
        )));
    }

    let out_dir = cli
        .out
        .clone()
        .or(file.paths.out)
        .unwrap_or_else(|| PathBuf::from("out"));

    let config = PipelineConfig {
        algo,
        slic,
        quickshift,
        merge,
        policy,
        border_is_edge,
        conflict,
        images_dir: cli.images.clone().or(file.paths.images),
        cams_dir: cli.cams.clone().or(file.paths.cams),
        gts_dir: cli.gts.clone().or(file.paths.gts),
        out_dir: out_dir.clone(),
        workers: cli.workers.or(file.pipeline.workers).unwrap_or(0),
        seed: cli.seed.or(file.pipeline.seed).unwrap_or(0),
        absent_class,
        search,
        overlay_alpha,
    };

    let command = match &cli.command {
        CliCommand::Superpix => Command::Superpix,
        CliCommand::Refine => Command::Refine,
        CliCommand::Eval { pred_dir, gt_dir } => Command::Eval {
            pred_dir: pred_dir.clone(),
            gt_dir: gt_dir.clone(),
        },
        CliCommand::Search => Command::Search,
        CliCommand::Overlay { image, masks } => Command::Overlay {
            image: image.clone(),
            masks: masks.clone(),
            out: overlay_out_path(&out_dir, image),
        },
    };
    Ok((config, command))
}

fn overlay_out_path(out: &Path, image: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "png") {
        out.to_path_buf()
    } else {
        let stem = image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "overlay".into());
        out.join(format!("{stem}_overlay.png"))
    }
}
