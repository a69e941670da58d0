//! Superpixel partitioning: SLIC and Quickshift oversegmentation, a
//! region-merge simplification stage, and hyperparameter grid search.
//!
//! Everything here is deterministic: seeding is grid-based, and every
//! distance or density tie breaks toward the lowest row-major pixel index,
//! so identical inputs produce identical label maps on every run.

mod merge;
mod quickshift;
mod search;
mod slic;

pub use merge::{merge_regions, MergeParams};
pub use quickshift::{quickshift, quickshift_forest, QuickshiftForest, QuickshiftParams};
pub use search::{grid_search, Algo, ParamsCombo, ScoredCombo, SearchOptions, SearchResult, SearchSpace};
pub use slic::{slic, SlicParams};

use crate::raster::Raster;

/// Per-pixel gradient magnitude over all channels, with one-sided
/// differences at the image border.
pub(crate) fn gradient_magnitude(image: &Raster) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let xl = x.saturating_sub(1);
            let xr = (x + 1).min(w - 1);
            let yu = y.saturating_sub(1);
            let yd = (y + 1).min(h - 1);
            let mut g = 0.0f64;
            for c in 0..image.channels() {
                let dx = image.get(xr, y, c) as f64 - image.get(xl, y, c) as f64;
                let dy = image.get(x, yd, c) as f64 - image.get(x, yu, c) as f64;
                g += dx * dx + dy * dy;
            }
            out[y * w + x] = g.sqrt();
        }
    }
    out
}
