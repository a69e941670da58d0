//! Quickshift: kernel-density mode seeking on the ratio-weighted
//! color-position feature space.
//!
//! Each pixel links to its nearest neighbor of strictly higher density
//! within `max_dist`, where "higher" is the lexicographic order
//! (density, then lower row-major index) so that density ties cannot stall
//! a chain. Pixels with no such neighbor are roots; clusters are the trees
//! of the resulting forest.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuickshiftParams {
    kernel_size: f64,
    max_dist: f64,
    ratio: f64,
}

impl QuickshiftParams {
    pub fn new(kernel_size: f64, max_dist: f64, ratio: f64) -> Result<Self> {
        if !kernel_size.is_finite() || kernel_size <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "quickshift kernel_size must be positive, got {kernel_size}"
            )));
        }
        if !max_dist.is_finite() || max_dist <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "quickshift max_dist must be positive, got {max_dist}"
            )));
        }
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "quickshift ratio must be in (0,1], got {ratio}"
            )));
        }
        Ok(Self {
            kernel_size,
            max_dist,
            ratio,
        })
    }

    pub fn kernel_size(&self) -> f64 {
        self.kernel_size
    }

    pub fn max_dist(&self) -> f64 {
        self.max_dist
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// The mode-seeking forest: per-pixel parent links (roots point to
/// themselves) and the kernel densities they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct QuickshiftForest {
    pub parents: Vec<usize>,
    pub densities: Vec<f64>,
}

/// Squared distance in the feature space `(ratio * color, x, y)`.
fn feature_dist2(image: &Raster, a: usize, b: usize, ratio: f64) -> f64 {
    let w = image.width();
    let (ax, ay) = (a % w, a / w);
    let (bx, by) = (b % w, b / w);
    let dx = ax as f64 - bx as f64;
    let dy = ay as f64 - by as f64;
    let mut d = dx * dx + dy * dy;
    for c in 0..image.channels() {
        let dc = (image.get(ax, ay, c) as f64 - image.get(bx, by, c) as f64) * ratio;
        d += dc * dc;
    }
    d
}

/// Computes parent links and densities without collapsing to labels.
pub fn quickshift_forest(image: &Raster, params: &QuickshiftParams) -> Result<QuickshiftForest> {
    QuickshiftParams::new(params.kernel_size, params.max_dist, params.ratio)?;
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let sigma = params.kernel_size;
    let ratio = params.ratio;
    let half = (3.0 * sigma).ceil() as i64;
    let inv_2s2 = 1.0 / (2.0 * sigma * sigma);

    // Gaussian density over the (2*ceil(3*sigma)+1)^2 spatial window,
    // accumulated in row-major window order.
    let mut densities = vec![0.0f64; n];
    for (i, slot) in densities.iter_mut().enumerate() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        let mut d = 0.0;
        for qy in (y - half).max(0)..=(y + half).min(h as i64 - 1) {
            for qx in (x - half).max(0)..=(x + half).min(w as i64 - 1) {
                let q = qy as usize * w + qx as usize;
                d += (-feature_dist2(image, i, q, ratio) * inv_2s2).exp();
            }
        }
        *slot = d;
    }

    // q is "denser" than p when (density, -index) compares greater
    let denser = |q: usize, p: usize| {
        densities[q] > densities[p] || (densities[q] == densities[p] && q < p)
    };

    let max_dist2 = params.max_dist * params.max_dist;
    let reach = params.max_dist.floor() as i64;
    let mut parents: Vec<usize> = (0..n).collect();
    for (i, parent) in parents.iter_mut().enumerate() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        let mut best = f64::INFINITY;
        for qy in (y - reach).max(0)..=(y + reach).min(h as i64 - 1) {
            for qx in (x - reach).max(0)..=(x + reach).min(w as i64 - 1) {
                let q = qy as usize * w + qx as usize;
                if q == i || !denser(q, i) {
                    continue;
                }
                let d = feature_dist2(image, i, q, ratio);
                if d <= max_dist2 && d < best {
                    best = d;
                    *parent = q;
                }
            }
        }
    }
    Ok(QuickshiftForest { parents, densities })
}

/// Segments `image` into the trees of the mode-seeking forest.
pub fn quickshift(image: &Raster, params: &QuickshiftParams) -> Result<LabelMap> {
    let forest = quickshift_forest(image, params)?;
    Ok(forest_to_labels(&forest.parents, image.width(), image.height()))
}

pub(crate) fn forest_to_labels(parents: &[usize], w: usize, h: usize) -> LabelMap {
    let n = parents.len();
    let mut root = vec![usize::MAX; n];
    for i in 0..n {
        if root[i] != usize::MAX {
            continue;
        }
        let mut path = vec![i];
        let mut cur = i;
        while parents[cur] != cur && root[cur] == usize::MAX {
            cur = parents[cur];
            path.push(cur);
        }
        let r = if root[cur] != usize::MAX { root[cur] } else { cur };
        for p in path {
            root[p] = r;
        }
    }
    let labels = root.iter().map(|&r| r as u32).collect();
    LabelMap::new(w, h, labels, n as u32)
        .expect("root indices are valid pixel indices")
        .compact()
}
