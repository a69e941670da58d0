//! Segmentation evaluation: Dice similarity, confusion counts, mean IoU,
//! the blank-mask baseline and batch reports.
//!
//! Conventions for degenerate cases: two empty masks have DSC 1.0, and a
//! class absent from both prediction and ground truth scores IoU 1.0 by
//! default. Both choices are what makes an all-background baseline score
//! above zero on datasets where many images contain no foreground; the
//! absent-class rule can be switched to skipping via [`AbsentClass::Skip`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap};

/// N×N pixel tally; `counts[i][j]` is the number of pixels predicted as
/// class `i` whose ground-truth label is `j`. Class 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionCounts {
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, predicted: usize, labeled: usize) -> u64 {
        self.counts[predicted * self.n_classes + labeled]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn row_sum(&self, i: usize) -> u64 {
        (0..self.n_classes).map(|j| self.get(i, j)).sum()
    }

    fn col_sum(&self, i: usize) -> u64 {
        (0..self.n_classes).map(|j| self.get(j, i)).sum()
    }
}

/// How to score a class whose IoU denominator is zero (absent from both
/// prediction and ground truth).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbsentClass {
    /// Count the class with IoU 1.0.
    #[default]
    ScoreOne,
    /// Leave the class out of the mean.
    Skip,
}

/// Dice similarity coefficient `2|A∩B| / (|A|+|B|)`. Both masks empty
/// yields 1.0.
pub fn dsc(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "dsc: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let mut inter = 0u64;
    let mut size_a = 0u64;
    let mut size_b = 0u64;
    for (&pa, &pb) in a.bits().iter().zip(b.bits()) {
        size_a += pa as u64;
        size_b += pb as u64;
        inter += (pa & pb) as u64;
    }
    if size_a + size_b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (size_a + size_b) as f64)
}

/// Confusion counts for a pair of binary masks (N = 2, background = 0).
pub fn confusion_binary(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    if !pred.same_dims(gt) {
        return Err(Error::DimensionMismatch(format!(
            "confusion: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut counts = vec![0u64; 4];
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        counts[p as usize * 2 + g as usize] += 1;
    }
    Ok(ConfusionCounts {
        n_classes: 2,
        counts,
    })
}

/// Confusion counts for label maps over `n_classes` classes. Any label
/// `>= n_classes` is a [`Error::LabelOutOfRange`].
pub fn confusion_labels(pred: &LabelMap, gt: &LabelMap, n_classes: usize) -> Result<ConfusionCounts> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::DimensionMismatch(format!(
            "confusion: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut counts = vec![0u64; n_classes * n_classes];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        if p as usize >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: p,
                classes: n_classes as u32,
            });
        }
        if g as usize >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: g,
                classes: n_classes as u32,
            });
        }
        counts[p as usize * n_classes + g as usize] += 1;
    }
    Ok(ConfusionCounts {
        n_classes,
        counts,
    })
}

/// Per-class IoU values `p_ii / (Σ_j p_ij + Σ_j p_ji − p_ii)`. A zero
/// denominator scores 1.0 (the class is absent from both sides).
pub fn per_class_iou(c: &ConfusionCounts) -> Vec<f64> {
    (0..c.n_classes)
        .map(|i| {
            let denom = c.row_sum(i) + c.col_sum(i) - c.get(i, i);
            if denom == 0 {
                1.0
            } else {
                c.get(i, i) as f64 / denom as f64
            }
        })
        .collect()
}

/// Mean IoU over all classes with the default absent-class rule.
pub fn miou(c: &ConfusionCounts) -> f64 {
    miou_with(c, AbsentClass::ScoreOne)
}

/// Mean IoU with an explicit absent-class rule. Under [`AbsentClass::Skip`]
/// with every class absent, returns 1.0 (nothing to miss on either side).
pub fn miou_with(c: &ConfusionCounts, absent: AbsentClass) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for i in 0..c.n_classes {
        let denom = c.row_sum(i) + c.col_sum(i) - c.get(i, i);
        if denom == 0 {
            if absent == AbsentClass::ScoreOne {
                sum += 1.0;
                counted += 1;
            }
        } else {
            sum += c.get(i, i) as f64 / denom as f64;
            counted += 1;
        }
    }
    if counted == 0 {
        1.0
    } else {
        sum / counted as f64
    }
}

/// Metrics for one evaluated image.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PerImageMetrics {
    pub id: String,
    pub dsc: f64,
    pub iou: Vec<f64>,
    pub miou: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Aggregate {
    pub avg_dsc: f64,
    pub avg_miou: f64,
}

/// Per-image metrics plus unweighted means over images.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricsReport {
    pub per_image: Vec<PerImageMetrics>,
    pub aggregate: Aggregate,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// CSV with columns `id, dsc, miou, iou_0, iou_1, ...`.
    pub fn to_csv(&self) -> String {
        let n_iou = self.per_image.first().map_or(2, |m| m.iou.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string(), "dsc".to_string(), "miou".to_string()];
        header.extend((0..n_iou).map(|i| format!("iou_{i}")));
        w.write_record(&header).expect("csv write");
        for m in &self.per_image {
            let mut record = vec![m.id.clone(), format!("{}", m.dsc), format!("{}", m.miou)];
            record.extend(m.iou.iter().map(|v| format!("{v}")));
            w.write_record(&record).expect("csv write");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }
}

// Summation order must not depend on how a batch was scheduled, and the
// aggregate has to match the plain mean to 1e-12 even for long batches.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

fn aggregate(per_image: &[PerImageMetrics]) -> Aggregate {
    let n = per_image.len() as f64;
    let dscs: Vec<f64> = per_image.iter().map(|m| m.dsc).collect();
    let mious: Vec<f64> = per_image.iter().map(|m| m.miou).collect();
    Aggregate {
        avg_dsc: pairwise_sum(&dscs) / n,
        avg_miou: pairwise_sum(&mious) / n,
    }
}

/// Evaluates one prediction/ground-truth pair.
pub fn evaluate_pair(id: &str, pred: &BinaryMask, gt: &BinaryMask) -> Result<PerImageMetrics> {
    evaluate_pair_with(id, pred, gt, AbsentClass::ScoreOne)
}

pub fn evaluate_pair_with(
    id: &str,
    pred: &BinaryMask,
    gt: &BinaryMask,
    absent: AbsentClass,
) -> Result<PerImageMetrics> {
    let d = dsc(pred, gt)?;
    let c = confusion_binary(pred, gt)?;
    Ok(PerImageMetrics {
        id: id.to_string(),
        dsc: d,
        iou: per_class_iou(&c),
        miou: miou_with(&c, absent),
    })
}

/// Evaluates aligned prediction/ground-truth lists, ordered by id.
pub fn evaluate_batch(
    preds: &[BinaryMask],
    gts: &[BinaryMask],
    ids: &[String],
) -> Result<MetricsReport> {
    evaluate_batch_with(preds, gts, ids, AbsentClass::ScoreOne)
}

/// [`evaluate_batch`] with an explicit absent-class rule.
pub fn evaluate_batch_with(
    preds: &[BinaryMask],
    gts: &[BinaryMask],
    ids: &[String],
    absent: AbsentClass,
) -> Result<MetricsReport> {
    if preds.len() != gts.len() || preds.len() != ids.len() {
        return Err(Error::MisalignedInputs(format!(
            "{} predictions, {} ground truths, {} ids",
            preds.len(),
            gts.len(),
            ids.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput("evaluate_batch needs at least one pair".into()));
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let mut per_image = Vec::with_capacity(preds.len());
    for &i in &order {
        per_image.push(evaluate_pair_with(&ids[i], &preds[i], &gts[i], absent)?);
    }
    let aggregate = aggregate(&per_image);
    Ok(MetricsReport {
        per_image,
        aggregate,
    })
}

/// Scores the all-background prediction against each ground truth.
pub fn blank_baseline(gts: &[BinaryMask]) -> Result<MetricsReport> {
    if gts.is_empty() {
        return Err(Error::EmptyInput("blank_baseline needs at least one mask".into()));
    }
    let preds: Vec<BinaryMask> = gts
        .iter()
        .map(|g| BinaryMask::zeros(g.width(), g.height()))
        .collect();
    let ids: Vec<String> = (0..gts.len()).map(|i| format!("{i:06}")).collect();
    evaluate_batch(&preds, gts, &ids)
}
