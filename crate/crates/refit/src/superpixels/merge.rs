//! Agglomerative simplification of a superpixel partition: repeatedly merge
//! the adjacent region pair with the smallest mean-color distance while that
//! distance stays within the threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergeParams {
    color_threshold: f64,
}

impl MergeParams {
    pub fn new(color_threshold: f64) -> Result<Self> {
        if !color_threshold.is_finite() || color_threshold < 0.0 {
            return Err(Error::InvalidParams(format!(
                "merge color_threshold must be non-negative, got {color_threshold}"
            )));
        }
        Ok(Self { color_threshold })
    }

    pub fn color_threshold(&self) -> f64 {
        self.color_threshold
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    // the smaller id stays the representative, which keeps the id order
    // aligned with row-major first-pixel order after compaction
    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        keep
    }
}

/// Merges adjacent regions whose mean colors are within `color_threshold`
/// of each other, closest pair first, and compacts the result. A zero
/// threshold disables merging and only compacts.
pub fn merge_regions(image: &Raster, labels: &LabelMap, params: &MergeParams) -> Result<LabelMap> {
    if image.width() != labels.width() || image.height() != labels.height() {
        return Err(Error::DimensionMismatch(format!(
            "merge_regions: image {}x{} vs labels {}x{}",
            image.width(),
            image.height(),
            labels.width(),
            labels.height()
        )));
    }
    let labels = labels.compact();
    if params.color_threshold == 0.0 {
        return Ok(labels);
    }
    let (w, h) = (labels.width(), labels.height());
    let m = labels.label_count() as usize;
    let ch = image.channels();

    let mut count = vec![0u64; m];
    let mut sums = vec![0.0f64; m * ch];
    for (i, &l) in labels.labels().iter().enumerate() {
        let l = l as usize;
        count[l] += 1;
        for (c, &v) in image.pixel(i % w, i / w).iter().enumerate() {
            sums[l * ch + c] += v as f64;
        }
    }

    let mut edges = std::collections::BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let a = labels.get(x, y);
            if x + 1 < w {
                let b = labels.get(x + 1, y);
                if a != b {
                    edges.insert((a.min(b) as usize, a.max(b) as usize));
                }
            }
            if y + 1 < h {
                let b = labels.get(x, y + 1);
                if a != b {
                    edges.insert((a.min(b) as usize, a.max(b) as usize));
                }
            }
        }
    }

    let mut ds = DisjointSet::new(m);
    let threshold2 = params.color_threshold * params.color_threshold;
    loop {
        // closest current pair; ties resolve to the lexicographically
        // smallest root pair, i.e. toward earliest first pixels
        let mut best: Option<(f64, usize, usize)> = None;
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &edges {
            let (ra, rb) = (ds.find(a), ds.find(b));
            if ra == rb {
                continue;
            }
            let key = (ra.min(rb), ra.max(rb));
            if !seen.insert(key) {
                continue;
            }
            let mut d2 = 0.0;
            for c in 0..ch {
                let ma = sums[key.0 * ch + c] / count[key.0] as f64;
                let mb = sums[key.1 * ch + c] / count[key.1] as f64;
                d2 += (ma - mb) * (ma - mb);
            }
            let better = match best {
                None => d2 <= threshold2,
                Some((bd, ba, bb)) => {
                    d2 <= threshold2 && (d2 < bd || (d2 == bd && key < (ba, bb)))
                }
            };
            if better {
                best = Some((d2, key.0, key.1));
            }
        }
        let Some((_, a, b)) = best else { break };
        let keep = ds.union(a, b);
        let drop = if keep == a { b } else { a };
        count[keep] += count[drop];
        for c in 0..ch {
            sums[keep * ch + c] += sums[drop * ch + c];
        }
    }

    let out = labels
        .labels()
        .iter()
        .map(|&l| ds.find(l as usize) as u32)
        .collect();
    Ok(LabelMap::new(w, h, out, m as u32)
        .expect("roots are valid label ids")
        .compact())
}
