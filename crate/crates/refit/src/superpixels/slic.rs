//! SLIC: localized k-means in joint color-position space.
//!
//! Seeding is a regular grid with centers nudged to the lowest-gradient
//! pixel of their 3x3 neighborhood, so there is no RNG anywhere. The
//! distance between a pixel and a center is
//! `sqrt(d_color^2 + (d_xy / S)^2 * compactness^2)` with `S = sqrt(N / k)`,
//! which makes `compactness` unit-free.

use serde::Serialize;

use super::gradient_magnitude;
use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicParams {
    k: u32,
    compactness: f64,
    iterations: u32,
    enforce_connectivity: bool,
    min_region_frac: f64,
}

impl SlicParams {
    /// Builds params with `iterations = 10`, connectivity enforcement on
    /// and `min_region_frac = 0.25`.
    pub fn new(k: u32, compactness: f64) -> Result<Self> {
        let p = Self {
            k,
            compactness,
            iterations: 10,
            enforce_connectivity: true,
            min_region_frac: 0.25,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_iterations(mut self, iterations: u32) -> Result<Self> {
        self.iterations = iterations;
        self.validate()?;
        Ok(self)
    }

    pub fn with_enforce_connectivity(mut self, on: bool) -> Self {
        self.enforce_connectivity = on;
        self
    }

    pub fn with_min_region_frac(mut self, frac: f64) -> Result<Self> {
        self.min_region_frac = frac;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParams("slic k must be >= 1".into()));
        }
        if !self.compactness.is_finite() || self.compactness <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "slic compactness must be positive, got {}",
                self.compactness
            )));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParams("slic iterations must be >= 1".into()));
        }
        if !(self.min_region_frac > 0.0 && self.min_region_frac < 1.0) {
            return Err(Error::InvalidParams(format!(
                "slic min_region_frac must be in (0,1), got {}",
                self.min_region_frac
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn compactness(&self) -> f64 {
        self.compactness
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn enforce_connectivity(&self) -> bool {
        self.enforce_connectivity
    }

    pub fn min_region_frac(&self) -> f64 {
        self.min_region_frac
    }
}

struct Center {
    x: f64,
    y: f64,
    color: Vec<f64>,
}

/// Segments `image` into at most `k` superpixels. With connectivity
/// enforcement on, every output label is exactly one 4-connected component
/// and stray fragments below `min_region_frac` of the nominal superpixel
/// size are absorbed into an adjacent region.
pub fn slic(image: &Raster, params: &SlicParams) -> Result<LabelMap> {
    params.validate()?;
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let k = params.k as usize;
    if k > n {
        return Err(Error::KTooLarge {
            k: params.k,
            pixels: n,
        });
    }

    let mut centers = seed_centers(image, k);
    let s = (n as f64 / k as f64).sqrt();
    let inv_s2_m2 = params.compactness * params.compactness / (s * s);

    // search window half-widths; grid spacing per axis guarantees coverage
    let (nx, ny) = centers_per_axis(w, h, k);
    let rx = 2.0 * (w as f64 / nx as f64).max(s);
    let ry = 2.0 * (h as f64 / ny as f64).max(s);

    let mut labels = vec![u32::MAX; n];
    let mut best = vec![f64::INFINITY; n];
    for _ in 0..params.iterations {
        best.fill(f64::INFINITY);
        labels.fill(u32::MAX);
        for (ci, c) in centers.iter().enumerate() {
            let x0 = (c.x - rx).floor().max(0.0) as usize;
            let x1 = (c.x + rx).ceil().min(w as f64 - 1.0) as usize;
            let y0 = (c.y - ry).floor().max(0.0) as usize;
            let y1 = (c.y + ry).ceil().min(h as f64 - 1.0) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y * w + x;
                    let d = distance2(image, x, y, c, inv_s2_m2);
                    if d < best[i] {
                        best[i] = d;
                        labels[i] = ci as u32;
                    }
                }
            }
        }
        // any pixel missed by every window falls back to a full scan
        for i in 0..n {
            if labels[i] == u32::MAX {
                let (x, y) = (i % w, i / w);
                for (ci, c) in centers.iter().enumerate() {
                    let d = distance2(image, x, y, c, inv_s2_m2);
                    if d < best[i] {
                        best[i] = d;
                        labels[i] = ci as u32;
                    }
                }
            }
        }
        update_centers(image, &labels, &mut centers);
    }

    let map = LabelMap::new(w, h, labels, centers.len() as u32)?;
    let map = if params.enforce_connectivity {
        enforce_connectivity(&map, n as f64 / k as f64 * params.min_region_frac)
    } else {
        map.compact()
    };
    Ok(map)
}

fn distance2(image: &Raster, x: usize, y: usize, c: &Center, inv_s2_m2: f64) -> f64 {
    let mut dc = 0.0;
    for (ch, &cc) in c.color.iter().enumerate() {
        let d = image.get(x, y, ch) as f64 - cc;
        dc += d * d;
    }
    let dx = x as f64 - c.x;
    let dy = y as f64 - c.y;
    dc + (dx * dx + dy * dy) * inv_s2_m2
}

fn centers_per_axis(w: usize, h: usize, k: usize) -> (usize, usize) {
    let ny = ((k as f64 * h as f64 / w as f64).sqrt().round() as usize)
        .clamp(1, k.min(h));
    let nx = (k / ny).clamp(1, w);
    (nx, ny)
}

fn seed_centers(image: &Raster, k: usize) -> Vec<Center> {
    let (w, h) = (image.width(), image.height());
    let (nx, ny) = centers_per_axis(w, h, k);
    let grad = gradient_magnitude(image);
    let mut centers = Vec::with_capacity(nx * ny);
    for gy in 0..ny {
        for gx in 0..nx {
            let cx = (gx as f64 + 0.5) * w as f64 / nx as f64 - 0.5;
            let cy = (gy as f64 + 0.5) * h as f64 / ny as f64 - 0.5;
            let xi = (cx.round().max(0.0) as usize).min(w - 1);
            let yi = (cy.round().max(0.0) as usize).min(h - 1);
            // nudge to the lowest-gradient pixel nearby, row-major on ties
            let mut bx = xi;
            let mut by = yi;
            let mut bg = f64::INFINITY;
            for y in yi.saturating_sub(1)..=(yi + 1).min(h - 1) {
                for x in xi.saturating_sub(1)..=(xi + 1).min(w - 1) {
                    let g = grad[y * w + x];
                    if g < bg {
                        bg = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            centers.push(Center {
                x: bx as f64,
                y: by as f64,
                color: image.pixel(bx, by).iter().map(|&v| v as f64).collect(),
            });
        }
    }
    centers
}

fn update_centers(image: &Raster, labels: &[u32], centers: &mut [Center]) {
    let w = image.width();
    let ch = image.channels();
    let mut count = vec![0u64; centers.len()];
    let mut sx = vec![0.0f64; centers.len()];
    let mut sy = vec![0.0f64; centers.len()];
    let mut sc = vec![0.0f64; centers.len() * ch];
    for (i, &l) in labels.iter().enumerate() {
        let l = l as usize;
        count[l] += 1;
        sx[l] += (i % w) as f64;
        sy[l] += (i / w) as f64;
        let px = image.pixel(i % w, i / w);
        for (c, &v) in px.iter().enumerate() {
            sc[l * ch + c] += v as f64;
        }
    }
    for (l, center) in centers.iter_mut().enumerate() {
        if count[l] == 0 {
            continue; // empty cluster keeps its previous position
        }
        let n = count[l] as f64;
        center.x = sx[l] / n;
        center.y = sy[l] / n;
        for c in 0..ch {
            center.color[c] = sc[l * ch + c] / n;
        }
    }
}

/// Splits raw assignments into 4-connected components, keeps the largest
/// component of each label when it reaches `min_size`, and absorbs every
/// other component into an adjacent surviving region.
fn enforce_connectivity(map: &LabelMap, min_size: f64) -> LabelMap {
    let (w, h) = (map.width(), map.height());
    let n = w * h;

    // component ids in row-major discovery order
    let mut comp = vec![u32::MAX; n];
    let mut comp_size = Vec::new();
    let mut comp_label = Vec::new();
    let mut comp_first = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = comp_size.len() as u32;
        comp_first.push(start);
        comp_label.push(map.labels()[start]);
        let mut size = 0usize;
        comp[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |ni: usize| {
                if comp[ni] == u32::MAX && map.labels()[ni] == map.labels()[start] {
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
        comp_size.push(size);
    }
    let n_comps = comp_size.len();

    // the main component of a label is its largest one, earliest on ties
    let mut main_of_label = vec![usize::MAX; map.label_count() as usize];
    for c in 0..n_comps {
        let l = comp_label[c] as usize;
        let cur = main_of_label[l];
        if cur == usize::MAX || comp_size[c] > comp_size[cur] {
            main_of_label[l] = c;
        }
    }

    let mut kept = vec![false; n_comps];
    let mut any = false;
    for &m in &main_of_label {
        if m != usize::MAX && comp_size[m] as f64 >= min_size {
            kept[m] = true;
            any = true;
        }
    }
    if !any {
        // degenerate case: everything is tiny, keep the largest component
        let mut best = 0;
        for c in 1..n_comps {
            if comp_size[c] > comp_size[best] {
                best = c;
            }
        }
        kept[best] = true;
    }

    // resolve every non-kept component to an adjacent resolved region,
    // sweeping until the (connected) component graph settles
    let mut region = vec![usize::MAX; n_comps];
    for c in 0..n_comps {
        if kept[c] {
            region[c] = c;
        }
    }
    loop {
        let mut changed = false;
        let mut unresolved = false;
        for c in 0..n_comps {
            if region[c] != usize::MAX {
                continue;
            }
            'pixels: for i in 0..n {
                if comp[i] as usize != c {
                    continue;
                }
                let (x, y) = (i % w, i / w);
                for ni in neighbor_indices(x, y, w, h) {
                    let nc = comp[ni] as usize;
                    if nc != c && region[nc] != usize::MAX {
                        region[c] = region[nc];
                        changed = true;
                        break 'pixels;
                    }
                }
            }
            if region[c] == usize::MAX {
                unresolved = true;
            }
        }
        if !unresolved {
            break;
        }
        assert!(changed, "absorption must progress on a connected grid");
    }

    let labels = comp.iter().map(|&c| region[c as usize] as u32).collect();
    LabelMap::new(w, h, labels, n_comps as u32)
        .expect("region ids are component ids by construction")
        .compact()
}

fn neighbor_indices(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let mut out = [usize::MAX; 4];
    let mut n = 0;
    if y > 0 {
        out[n] = (y - 1) * w + x;
        n += 1;
    }
    if x > 0 {
        out[n] = y * w + x - 1;
        n += 1;
    }
    if x + 1 < w {
        out[n] = y * w + x + 1;
        n += 1;
    }
    if y + 1 < h {
        out[n] = (y + 1) * w + x;
        n += 1;
    }
    out.into_iter().take(n)
}
