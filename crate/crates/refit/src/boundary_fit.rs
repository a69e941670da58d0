//! Floodfill refinement of response maps against an edge map.
//!
//! A cluster is a 4-connected component of one region label. Starting from
//! any response-negative pixel, its whole cluster is turned negative, so a
//! cluster stays positive only when it lies completely inside the
//! binarized response. The module only ever deletes positives.

use crate::edgemap::EdgeMap;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap, ResponseMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Positive iff value >= threshold.
    Absolute,
    /// Positive iff value >= threshold * plane maximum; an all-zero plane
    /// yields an all-negative mask.
    Relative,
}

/// Binarization rule for response planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    mode: ThresholdMode,
    value: f64,
}

impl ThresholdPolicy {
    pub fn new(mode: ThresholdMode, value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidParams(format!(
                "threshold value must be in (0,1), got {value}"
            )));
        }
        Ok(Self { mode, value })
    }

    pub fn absolute(value: f64) -> Result<Self> {
        Self::new(ThresholdMode::Absolute, value)
    }

    pub fn relative(value: f64) -> Result<Self> {
        Self::new(ThresholdMode::Relative, value)
    }

    pub fn mode(&self) -> ThresholdMode {
        self.mode
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            mode: ThresholdMode::Absolute,
            value: 0.5,
        }
    }
}

/// How a pixel claimed by several classes is resolved in the combined map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConflictRule {
    /// Highest raw response wins; ties go to the lowest class index.
    #[default]
    Argmax,
    /// Lowest class index wins.
    First,
}

/// Refinement output: one mask per foreground class plus a combined label
/// map where label `n + 1` is class `n` and 0 is background.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedMask {
    pub per_class: Vec<BinaryMask>,
    pub combined: LabelMap,
}

/// Thresholds one class plane of a response map.
pub fn binarize(
    map: &ResponseMap,
    class_idx: usize,
    policy: &ThresholdPolicy,
) -> Result<BinaryMask> {
    if class_idx >= map.classes() {
        return Err(Error::BadClassIndex {
            index: class_idx,
            classes: map.classes(),
        });
    }
    let plane = map.plane(class_idx);
    let cut = match policy.mode {
        ThresholdMode::Absolute => policy.value,
        ThresholdMode::Relative => {
            let max = plane.iter().copied().fold(0.0f32, f32::max);
            if max == 0.0 {
                return Ok(BinaryMask::zeros(map.width(), map.height()));
            }
            policy.value * max as f64
        }
    };
    let bits = plane.iter().map(|&v| u8::from(v as f64 >= cut)).collect();
    BinaryMask::new(map.width(), map.height(), bits)
}

/// Pixel-wise component ids for 4-connected runs of equal labels, numbered
/// in row-major discovery order, plus the component count.
pub(crate) fn label_components(labels: &LabelMap) -> (Vec<u32>, usize) {
    let (w, h) = (labels.width(), labels.height());
    let n = w * h;
    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = next;
        next += 1;
        comp[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let l = labels.labels()[i];
            let mut visit = |ni: usize| {
                if comp[ni] == u32::MAX && labels.labels()[ni] == l {
                    comp[ni] = id;
                    stack.push(ni);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
    }
    (comp, next as usize)
}

/// Keeps a cluster positive only when every one of its pixels is positive
/// in `cam_mask`; every other cluster is flooded negative.
pub fn boundary_fit(cam_mask: &BinaryMask, edges: &EdgeMap) -> Result<BinaryMask> {
    if cam_mask.width() != edges.width() || cam_mask.height() != edges.height() {
        return Err(Error::DimensionMismatch(format!(
            "boundary_fit: mask {}x{} vs edge map {}x{}",
            cam_mask.width(),
            cam_mask.height(),
            edges.width(),
            edges.height()
        )));
    }
    let (comp, count) = label_components(edges.regions());
    let mut fully_positive = vec![true; count];
    for (i, &bit) in cam_mask.bits().iter().enumerate() {
        if bit == 0 {
            fully_positive[comp[i] as usize] = false;
        }
    }
    let bits = cam_mask
        .bits()
        .iter()
        .enumerate()
        .map(|(i, &bit)| bit & u8::from(fully_positive[comp[i] as usize]))
        .collect();
    BinaryMask::new(cam_mask.width(), cam_mask.height(), bits)
}

/// Binarizes and floodfill-refines every class plane, then combines the
/// per-class masks into a single label map under the conflict rule.
pub fn refine(
    image_cam: &ResponseMap,
    edges: &EdgeMap,
    policy: &ThresholdPolicy,
    conflict: ConflictRule,
) -> Result<RefinedMask> {
    if image_cam.width() != edges.width() || image_cam.height() != edges.height() {
        return Err(Error::DimensionMismatch(format!(
            "refine: response {}x{} vs edge map {}x{}",
            image_cam.width(),
            image_cam.height(),
            edges.width(),
            edges.height()
        )));
    }
    let per_class: Vec<BinaryMask> = (0..image_cam.classes())
        .map(|n| boundary_fit(&binarize(image_cam, n, policy)?, edges))
        .collect::<Result<_>>()?;

    let (w, h) = (image_cam.width(), image_cam.height());
    let mut labels = vec![0u32; w * h];
    for (i, label) in labels.iter_mut().enumerate() {
        let (x, y) = (i % w, i / w);
        let mut winner: Option<usize> = None;
        for (n, mask) in per_class.iter().enumerate() {
            if mask.bits()[i] == 0 {
                continue;
            }
            winner = Some(match (winner, conflict) {
                (None, _) => n,
                (Some(best), ConflictRule::First) => best,
                (Some(best), ConflictRule::Argmax) => {
                    // strict > keeps the lowest class index on ties
                    if image_cam.get(n, x, y) > image_cam.get(best, x, y) {
                        n
                    } else {
                        best
                    }
                }
            });
        }
        if let Some(n) = winner {
            *label = n as u32 + 1;
        }
    }
    let combined = LabelMap::new(w, h, labels, image_cam.classes() as u32 + 1)?;
    Ok(RefinedMask {
        per_class,
        combined,
    })
}
