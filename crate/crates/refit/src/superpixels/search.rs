//! Hyperparameter grid search over the superpixel stage.
//!
//! Scores the full Cartesian product of the candidate lists on a seeded
//! sample of images. With ground truths and response maps the score is the
//! mean end-to-end Dice of the refined masks; without them it falls back to
//! a boundary-recall proxy, the fraction of image gradient magnitude that
//! falls on region boundaries.

use rand::SeedableRng;
use serde::Serialize;

use super::{gradient_magnitude, merge_regions, quickshift, slic};
use super::{MergeParams, QuickshiftParams, SlicParams};
use crate::boundary_fit::{binarize, boundary_fit, ThresholdPolicy};
use crate::edgemap::build_edge_map;
use crate::error::{Error, Result};
use crate::metrics::dsc;
use crate::raster::{BinaryMask, LabelMap, Raster, ResponseMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Slic,
    Quickshift,
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slic" => Ok(Algo::Slic),
            "quickshift" => Ok(Algo::Quickshift),
            other => Err(Error::InvalidParams(format!(
                "unknown algorithm {other:?}, expected slic or quickshift"
            ))),
        }
    }
}

/// Candidate values per hyperparameter plus the image sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub k: Vec<u32>,
    pub compactness: Vec<f64>,
    pub kernel_size: Vec<f64>,
    pub max_dist: Vec<f64>,
    pub ratio: Vec<f64>,
    pub color_threshold: Vec<f64>,
    pub sample_size: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            k: vec![16, 64, 256],
            compactness: vec![0.2, 1.0, 10.0],
            kernel_size: vec![1.0, 2.0],
            max_dist: vec![2.0, 4.0, 8.0],
            ratio: vec![0.5, 1.0],
            color_threshold: vec![0.0, 0.05, 0.1],
            sample_size: 100,
        }
    }
}

/// Extra knobs the search inherits from the pipeline configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub seed: u64,
    pub policy: ThresholdPolicy,
    pub border_is_edge: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            policy: ThresholdPolicy::default(),
            border_is_edge: true,
        }
    }
}

/// One point of the Cartesian product; only the fields relevant to the
/// algorithm are set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsCombo {
    pub algo: Algo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compactness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub color_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredCombo {
    pub params: ParamsCombo,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best: ScoredCombo,
    pub table: Vec<ScoredCombo>,
    /// Indices of the images that were scored, ascending.
    pub sample_indices: Vec<usize>,
}

/// Runs the partition for one parameter combination.
pub fn segment_with(image: &Raster, combo: &ParamsCombo) -> Result<LabelMap> {
    let labels = match combo.algo {
        Algo::Slic => {
            let params = SlicParams::new(
                combo.k.expect("slic combo carries k"),
                combo.compactness.expect("slic combo carries compactness"),
            )?;
            slic(image, &params)?
        }
        Algo::Quickshift => {
            let params = QuickshiftParams::new(
                combo.kernel_size.expect("quickshift combo carries kernel_size"),
                combo.max_dist.expect("quickshift combo carries max_dist"),
                combo.ratio.expect("quickshift combo carries ratio"),
            )?;
            quickshift(image, &params)?
        }
    };
    merge_regions(image, &labels, &MergeParams::new(combo.color_threshold)?)
}

fn enumerate_combos(space: &SearchSpace, algo: Algo) -> Result<Vec<ParamsCombo>> {
    let need = |name: &str, empty: bool| {
        if empty {
            Err(Error::EmptySpace(format!("no candidate values for {name}")))
        } else {
            Ok(())
        }
    };
    let mut combos = Vec::new();
    match algo {
        Algo::Slic => {
            need("k", space.k.is_empty())?;
            need("compactness", space.compactness.is_empty())?;
            need("color_threshold", space.color_threshold.is_empty())?;
            for &k in &space.k {
                for &compactness in &space.compactness {
                    for &color_threshold in &space.color_threshold {
                        combos.push(ParamsCombo {
                            algo,
                            k: Some(k),
                            compactness: Some(compactness),
                            kernel_size: None,
                            max_dist: None,
                            ratio: None,
                            color_threshold,
                        });
                    }
                }
            }
        }
        Algo::Quickshift => {
            need("kernel_size", space.kernel_size.is_empty())?;
            need("max_dist", space.max_dist.is_empty())?;
            need("ratio", space.ratio.is_empty())?;
            need("color_threshold", space.color_threshold.is_empty())?;
            for &kernel_size in &space.kernel_size {
                for &max_dist in &space.max_dist {
                    for &ratio in &space.ratio {
                        for &color_threshold in &space.color_threshold {
                            combos.push(ParamsCombo {
                                algo,
                                k: None,
                                compactness: None,
                                kernel_size: Some(kernel_size),
                                max_dist: Some(max_dist),
                                ratio: Some(ratio),
                                color_threshold,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(combos)
}

/// Scores every combination on a seeded image sample and returns the argmax
/// plus the full score table. Ties keep the first-enumerated combination.
pub fn grid_search(
    images: &[Raster],
    gts: Option<&[BinaryMask]>,
    cams: Option<&[ResponseMap]>,
    space: &SearchSpace,
    algo: Algo,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    if images.is_empty() {
        return Err(Error::EmptyInput("grid_search needs at least one image".into()));
    }
    if space.sample_size == 0 {
        return Err(Error::InvalidParams("sample_size must be >= 1".into()));
    }
    if let Some(gts) = gts {
        if gts.len() != images.len() {
            return Err(Error::MisalignedInputs(format!(
                "{} images but {} ground truths",
                images.len(),
                gts.len()
            )));
        }
    }
    if let Some(cams) = cams {
        if cams.len() != images.len() {
            return Err(Error::MisalignedInputs(format!(
                "{} images but {} response maps",
                images.len(),
                cams.len()
            )));
        }
    }
    let combos = enumerate_combos(space, algo)?;

    let count = space.sample_size.min(images.len());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sample_indices = rand::seq::index::sample(&mut rng, images.len(), count).into_vec();
    sample_indices.sort_unstable();

    let end_to_end = match (gts, cams) {
        (Some(g), Some(c)) => Some((g, c)),
        _ => None,
    };

    let mut table = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut sum = 0.0;
        for &i in &sample_indices {
            let merged = segment_with(&images[i], &combo)?;
            sum += match end_to_end {
                Some((gts, cams)) => {
                    let edges = build_edge_map(&merged, opts.border_is_edge);
                    let mask = binarize(&cams[i], 0, &opts.policy)?;
                    let refined = boundary_fit(&mask, &edges)?;
                    dsc(&refined, &gts[i])?
                }
                None => boundary_recall_proxy(&images[i], &merged),
            };
        }
        table.push(ScoredCombo {
            params: combo,
            score: sum / count as f64,
        });
    }

    let mut best = table[0].clone();
    for entry in &table[1..] {
        if entry.score > best.score {
            best = entry.clone();
        }
    }
    Ok(SearchResult {
        best,
        table,
        sample_indices,
    })
}

/// Fraction of total gradient magnitude lying on internal region
/// boundaries; 0.0 for a gradient-free image.
fn boundary_recall_proxy(image: &Raster, labels: &LabelMap) -> f64 {
    let edges = build_edge_map(labels, false);
    let grad = gradient_magnitude(image);
    let total: f64 = grad.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let captured: f64 = grad
        .iter()
        .zip(edges.boundary().bits())
        .filter(|(_, &b)| b == 1)
        .map(|(&g, _)| g)
        .sum();
    captured / total
}
