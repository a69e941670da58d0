//! Independent reference implementations used to check the library. These
//! deliberately share no code with the crate under test: metrics are naive
//! double loops, floodfill is a per-pixel BFS, and quickshift is the full
//! O(n^2) density/parent computation.

use refit::raster::{BinaryMask, LabelMap, Raster};
use refit::superpixels::QuickshiftParams;

pub fn dsc_naive(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let (w, h) = (a.width(), a.height());
    let mut inter = 0u64;
    let mut sa = 0u64;
    let mut sb = 0u64;
    for y in 0..h {
        for x in 0..w {
            if a.get(x, y) == 1 {
                sa += 1;
            }
            if b.get(x, y) == 1 {
                sb += 1;
            }
            if a.get(x, y) == 1 && b.get(x, y) == 1 {
                inter += 1;
            }
        }
    }
    if sa + sb == 0 {
        1.0
    } else {
        2.0 * inter as f64 / (sa + sb) as f64
    }
}

pub fn confusion_naive(pred: &BinaryMask, gt: &BinaryMask) -> [[u64; 2]; 2] {
    let mut counts = [[0u64; 2]; 2];
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            counts[pred.get(x, y) as usize][gt.get(x, y) as usize] += 1;
        }
    }
    counts
}

pub fn miou_naive(counts: &[[u64; 2]; 2]) -> f64 {
    let mut sum = 0.0;
    for i in 0..2 {
        let row: u64 = counts[i].iter().sum();
        let col: u64 = (0..2).map(|j| counts[j][i]).sum();
        let denom = row + col - counts[i][i];
        sum += if denom == 0 {
            1.0
        } else {
            counts[i][i] as f64 / denom as f64
        };
    }
    sum / 2.0
}

/// Per-pixel evaluation of the floodfill rule: a pixel stays positive iff
/// every pixel reachable through same-label 4-neighbors is positive.
pub fn boundary_fit_naive(cam: &BinaryMask, labels: &LabelMap) -> BinaryMask {
    let (w, h) = (cam.width(), cam.height());
    let mut out = BinaryMask::zeros(w, h);
    for sy in 0..h {
        for sx in 0..w {
            if cam.get(sx, sy) == 0 {
                continue;
            }
            let mut seen = vec![false; w * h];
            let mut stack = vec![(sx, sy)];
            seen[sy * w + sx] = true;
            let mut pure = true;
            while let Some((x, y)) = stack.pop() {
                if cam.get(x, y) == 0 {
                    pure = false;
                }
                let l = labels.get(x, y);
                let mut visit = |nx: usize, ny: usize| {
                    if !seen[ny * w + nx] && labels.get(nx, ny) == l {
                        seen[ny * w + nx] = true;
                        stack.push((nx, ny));
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < w {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < h {
                    visit(x, y + 1);
                }
            }
            if pure {
                out.set(sx, sy, 1);
            }
        }
    }
    out
}

/// 4-connected components of equal labels, row-major discovery order.
pub fn components_naive(labels: &LabelMap) -> (Vec<u32>, usize) {
    let (w, h) = (labels.width(), labels.height());
    let n = w * h;
    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = next;
        next += 1;
        let mut queue = std::collections::VecDeque::from([start]);
        comp[start] = id;
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let l = labels.labels()[i];
            let mut visit = |ni: usize| {
                if comp[ni] == u32::MAX && labels.labels()[ni] == l {
                    comp[ni] = id;
                    queue.push_back(ni);
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

pub struct QuickshiftOracle {
    pub densities: Vec<f64>,
    pub parents: Vec<usize>,
    pub labels: Vec<u32>,
}

fn feat_dist2(img: &Raster, p: usize, q: usize, ratio: f64) -> f64 {
    let w = img.width();
    let (px, py) = (p % w, p / w);
    let (qx, qy) = (q % w, q / w);
    let dx = px as f64 - qx as f64;
    let dy = py as f64 - qy as f64;
    let mut d = dx * dx + dy * dy;
    for c in 0..img.channels() {
        let dc = (img.get(px, py, c) as f64 - img.get(qx, qy, c) as f64) * ratio;
        d += dc * dc;
    }
    d
}

/// Full O(n^2) densities, parents and root labels.
pub fn quickshift_naive(img: &Raster, params: &QuickshiftParams) -> QuickshiftOracle {
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let half = (3.0 * params.kernel_size()).ceil() as i64;
    let inv = 1.0 / (2.0 * params.kernel_size() * params.kernel_size());
    let mut densities = vec![0.0f64; n];
    for p in 0..n {
        for q in 0..n {
            let (px, py) = ((p % w) as i64, (p / w) as i64);
            let (qx, qy) = ((q % w) as i64, (q / w) as i64);
            if (px - qx).abs() > half || (py - qy).abs() > half {
                continue;
            }
            densities[p] += (-feat_dist2(img, p, q, params.ratio()) * inv).exp();
        }
    }
    let md2 = params.max_dist() * params.max_dist();
    let mut parents: Vec<usize> = (0..n).collect();
    for p in 0..n {
        let mut best = f64::INFINITY;
        for q in 0..n {
            if q == p {
                continue;
            }
            let higher =
                densities[q] > densities[p] || (densities[q] == densities[p] && q < p);
            if !higher {
                continue;
            }
            let d = feat_dist2(img, p, q, params.ratio());
            if d <= md2 && d < best {
                best = d;
                parents[p] = q;
            }
        }
    }
    // root of each pixel, then first-appearance renumbering
    let mut roots = vec![0usize; n];
    for p in 0..n {
        let mut cur = p;
        while parents[cur] != cur {
            cur = parents[cur];
        }
        roots[p] = cur;
    }
    let mut remap = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for &r in &roots {
        let next = remap.len() as u32;
        labels.push(*remap.entry(r).or_insert(next));
    }
    QuickshiftOracle {
        densities,
        parents,
        labels,
    }
}

pub fn feature_distance2(img: &Raster, p: usize, q: usize, ratio: f64) -> f64 {
    feat_dist2(img, p, q, ratio)
}
