//! Edge maps: a region partition together with the boundary pixels that
//! close each region.
//!
//! The boundary is an overlay mask, not a relabeling: a boundary pixel keeps
//! its region's label. Region membership is what the floodfill refinement
//! consumes; the boundary raster is for export, scoring and overlays.

use crate::raster::{BinaryMask, LabelMap};

/// A cluster partition plus the pixels that demarcate it. 4-connectivity
/// throughout; with `border_is_edge`, the image frontier also counts as a
/// closing edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    regions: LabelMap,
    boundary: BinaryMask,
}

impl EdgeMap {
    pub fn regions(&self) -> &LabelMap {
        &self.regions
    }

    pub fn boundary(&self) -> &BinaryMask {
        &self.boundary
    }

    pub fn width(&self) -> usize {
        self.regions.width()
    }

    pub fn height(&self) -> usize {
        self.regions.height()
    }
}

/// Marks every pixel with a 4-neighbor of a different label, plus the outer
/// row/column frontier when `border_is_edge` is set. Regions pass through
/// unchanged.
pub fn build_edge_map(labels: &LabelMap, border_is_edge: bool) -> EdgeMap {
    let (w, h) = (labels.width(), labels.height());
    let mut boundary = BinaryMask::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let here = labels.get(x, y);
            let on_border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            let edge = (border_is_edge && on_border)
                || (x > 0 && labels.get(x - 1, y) != here)
                || (x + 1 < w && labels.get(x + 1, y) != here)
                || (y > 0 && labels.get(x, y - 1) != here)
                || (y + 1 < h && labels.get(x, y + 1) != here);
            if edge {
                boundary.set(x, y, 1);
            }
        }
    }
    EdgeMap {
        regions: labels.clone(),
        boundary,
    }
}
