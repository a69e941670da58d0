//! Subcommand implementations. All per-image work is pure library calls;
//! batches fan out over a bounded rayon pool and every artifact is written
//! to a temp file first and renamed into place, so a failing run never
//! leaves partial outputs and worker count cannot change any byte.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use refit::boundary_fit::refine;
use refit::edgemap::build_edge_map;
use refit::error::Error;
use refit::io::{load_image, load_mask, load_response_map, save_label_map, save_mask};
use refit::metrics::evaluate_batch_with;
use refit::raster::{LabelMap, Raster};
use refit::superpixels::{grid_search, merge_regions, quickshift, slic, Algo, SearchOptions};

use crate::config::PipelineConfig;
use crate::overlay::render_overlay;
use crate::pairing::{list_files, pair_by_stem, stem};
use crate::CmdError;

const IMAGE_EXTS: &[&str] = &["png", "pgm"];

fn map_err(e: Error) -> CmdError {
    match e {
        Error::EmptySpace(_) | Error::InvalidParams(_) | Error::KTooLarge { .. } | Error::EmptyInput(_) => {
            CmdError::Config(e.to_string())
        }
        Error::MisalignedInputs(_) | Error::DimensionMismatch(_) => {
            CmdError::Misaligned(e.to_string())
        }
        other => CmdError::Io(other.to_string()),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Writes through a temp file in the target directory and renames on
/// success.
fn atomic_write(
    path: &Path,
    write: impl FnOnce(&Path) -> refit::Result<()>,
) -> Result<(), String> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| format!("cannot create temp file in {}: {e}", dir.display()))?;
    write(tmp.path()).map_err(|e| e.to_string())?;
    tmp.persist(path)
        .map_err(|e| format!("cannot rename into {}: {e}", path.display()))?;
    Ok(())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CmdError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CmdError::Config(format!("cannot build worker pool: {e}")))
}

fn segment(config: &PipelineConfig, image: &Raster) -> refit::Result<LabelMap> {
    let labels = match config.algo {
        Algo::Slic => slic(image, &config.slic)?,
        Algo::Quickshift => quickshift(image, &config.quickshift)?,
    };
    merge_regions(image, &labels, &config.merge)
}

fn images_dir(config: &PipelineConfig) -> Result<&PathBuf, CmdError> {
    config
        .images_dir
        .as_ref()
        .ok_or_else(|| CmdError::Config("no image directory configured".into()))
}

fn input_images(dir: &Path) -> Result<Vec<PathBuf>, CmdError> {
    let files = list_files(dir, IMAGE_EXTS)?;
    if files.is_empty() {
        return Err(CmdError::Config(format!(
            "no input images in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Writes one superpixel label map per input image.
pub fn cmd_superpix(config: &PipelineConfig) -> Result<usize, CmdError> {
    let files = input_images(images_dir(config)?)?;
    ensure_dir(&config.out_dir)?;
    let pool = thread_pool(config.workers)?;

    let results: Vec<Result<(), String>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let image = load_image(path).map_err(|e| e.to_string())?;
                let labels = segment(config, &image).map_err(|e| e.to_string())?;
                let out = config.out_dir.join(format!("{}.png", stem(path)));
                atomic_write(&out, |p| save_label_map(&labels, p))
            })
            .collect()
    });

    Ok(count_failures(&files, &results))
}

/// Refines each image's response map against its superpixel edge map.
pub fn cmd_refine(config: &PipelineConfig) -> Result<usize, CmdError> {
    let images = input_images(images_dir(config)?)?;
    let cams_dir = config
        .cams_dir
        .as_ref()
        .ok_or_else(|| CmdError::Config("no response-map directory configured".into()))?;
    let cams = list_files(cams_dir, &["rfm"])?;
    let pairs = pair_by_stem(&images, &cams, ("image", "response map"))?;
    ensure_dir(&config.out_dir)?;
    let pool = thread_pool(config.workers)?;

    let results: Vec<Result<(), String>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(image_path, cam_path)| {
                let image = load_image(image_path).map_err(|e| e.to_string())?;
                let cam = load_response_map(cam_path).map_err(|e| e.to_string())?;
                if cam.width() != image.width() || cam.height() != image.height() {
                    return Err(format!(
                        "response map is {}x{} but image is {}x{}",
                        cam.width(),
                        cam.height(),
                        image.width(),
                        image.height()
                    ));
                }
                let labels = segment(config, &image).map_err(|e| e.to_string())?;
                let edges = build_edge_map(&labels, config.border_is_edge);
                let refined = refine(&cam, &edges, &config.policy, config.conflict)
                    .map_err(|e| e.to_string())?;
                let name = stem(image_path);
                if refined.per_class.len() == 1 {
                    let out = config.out_dir.join(format!("{name}.png"));
                    atomic_write(&out, |p| save_mask(&refined.per_class[0], p))?;
                } else {
                    for (n, mask) in refined.per_class.iter().enumerate() {
                        let out = config.out_dir.join(format!("{name}_c{n}.png"));
                        atomic_write(&out, |p| save_mask(mask, p))?;
                    }
                    let out = config.out_dir.join(format!("{name}_labels.png"));
                    atomic_write(&out, |p| save_label_map(&refined.combined, p))?;
                }
                Ok(())
            })
            .collect()
    });

    let inputs: Vec<PathBuf> = pairs.into_iter().map(|(i, _)| i).collect();
    Ok(count_failures(&inputs, &results))
}

fn count_failures(inputs: &[PathBuf], results: &[Result<(), String>]) -> usize {
    let mut failures = 0;
    for (path, result) in inputs.iter().zip(results) {
        if let Err(msg) = result {
            log::warn!("skipped {}: {msg}", path.display());
            failures += 1;
        }
    }
    failures
}

/// Evaluates predicted masks against ground truths and writes JSON and CSV
/// reports.
pub fn cmd_eval(config: &PipelineConfig, pred_dir: &Path, gt_dir: &Path) -> Result<usize, CmdError> {
    let gts = list_files(gt_dir, &["png"])?;
    if gts.is_empty() {
        return Err(CmdError::Config(format!(
            "no ground-truth masks in {}",
            gt_dir.display()
        )));
    }
    let preds = list_files(pred_dir, &["png"])?;
    if preds.is_empty() {
        return Err(CmdError::Config(format!(
            "no predictions in {}",
            pred_dir.display()
        )));
    }
    let pairs = pair_by_stem(&preds, &gts, ("prediction", "ground truth"))?;

    let pool = thread_pool(config.workers)?;
    let loaded: Vec<Result<_, Error>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(p, g)| Ok((load_mask(p)?, load_mask(g)?)))
            .collect()
    });
    let mut preds = Vec::with_capacity(pairs.len());
    let mut truths = Vec::with_capacity(pairs.len());
    for r in loaded {
        let (p, g) = r.map_err(map_err)?;
        preds.push(p);
        truths.push(g);
    }
    let ids: Vec<String> = pairs.iter().map(|(p, _)| stem(p)).collect();

    let report =
        evaluate_batch_with(&preds, &truths, &ids, config.absent_class).map_err(map_err)?;
    ensure_dir(&config.out_dir)?;
    let json = report.to_json();
    let csv = report.to_csv();
    atomic_write(&config.out_dir.join("report.json"), |p| {
        std::fs::write(p, &json).map_err(|e| io_error(p, e))
    })
    .map_err(CmdError::Io)?;
    atomic_write(&config.out_dir.join("report.csv"), |p| {
        std::fs::write(p, &csv).map_err(|e| io_error(p, e))
    })
    .map_err(CmdError::Io)?;

    println!(
        "avg_dsc {:.1} avg_miou {:.1}",
        report.aggregate.avg_dsc * 100.0,
        report.aggregate.avg_miou * 100.0
    );
    Ok(0)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::IoFailure {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Grid-searches superpixel hyperparameters on a seeded image sample and
/// writes the score table plus the argmax parameters.
pub fn cmd_search(config: &PipelineConfig) -> Result<usize, CmdError> {
    let files = input_images(images_dir(config)?)?;
    let mut images = Vec::with_capacity(files.len());
    for f in &files {
        images.push(load_image(f).map_err(map_err)?);
    }

    // end-to-end scoring needs both ground truths and response maps
    let supervised = match (&config.gts_dir, &config.cams_dir) {
        (Some(gt_dir), Some(cam_dir)) => {
            let gt_files = list_files(gt_dir, &["png"])?;
            let cam_files = list_files(cam_dir, &["rfm"])?;
            let gt_pairs = pair_by_stem(&files, &gt_files, ("image", "ground truth"))?;
            let cam_pairs = pair_by_stem(&files, &cam_files, ("image", "response map"))?;
            let mut gts = Vec::with_capacity(files.len());
            let mut cams = Vec::with_capacity(files.len());
            for ((_, g), (_, c)) in gt_pairs.iter().zip(&cam_pairs) {
                gts.push(load_mask(g).map_err(map_err)?);
                cams.push(load_response_map(c).map_err(map_err)?);
            }
            Some((gts, cams))
        }
        _ => None,
    };

    let opts = SearchOptions {
        seed: config.seed,
        policy: config.policy,
        border_is_edge: config.border_is_edge,
    };
    let result = grid_search(
        &images,
        supervised.as_ref().map(|(g, _)| g.as_slice()),
        supervised.as_ref().map(|(_, c)| c.as_slice()),
        &config.search,
        config.algo,
        &opts,
    )
    .map_err(map_err)?;

    ensure_dir(&config.out_dir)?;
    let table = serde_json::to_string_pretty(&result.table).expect("table serializes");
    let best = serde_json::to_string_pretty(&result.best).expect("best serializes");
    atomic_write(&config.out_dir.join("score_table.json"), |p| {
        std::fs::write(p, &table).map_err(|e| io_error(p, e))
    })
    .map_err(CmdError::Io)?;
    atomic_write(&config.out_dir.join("best_params.json"), |p| {
        std::fs::write(p, &best).map_err(|e| io_error(p, e))
    })
    .map_err(CmdError::Io)?;

    println!("{}", serde_json::to_string(&result.best).expect("best serializes"));
    Ok(0)
}

/// Renders mask fills and contours over an image.
pub fn cmd_overlay(
    config: &PipelineConfig,
    image_path: &Path,
    mask_paths: &[PathBuf],
    out: &Path,
) -> Result<usize, CmdError> {
    let image = load_image(image_path).map_err(|e| CmdError::Io(e.to_string()))?;
    let mut masks = Vec::with_capacity(mask_paths.len());
    for p in mask_paths {
        masks.push(load_mask(p).map_err(|e| CmdError::Io(e.to_string()))?);
    }
    let rendered =
        render_overlay(&image, &masks, config.overlay_alpha).map_err(|e| CmdError::Io(e.to_string()))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    atomic_write(out, |p| {
        rendered
            .save_with_format(p, image::ImageFormat::Png)
            .map_err(|e| Error::IoFailure {
                path: p.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            })
    })
    .map_err(CmdError::Io)?;
    Ok(0)
}
