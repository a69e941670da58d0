//! Seeded disk/ellipse phantoms with synthetic response maps: the ground
//! truth dilated by 3-7 px plus small bumps hugging the dilated boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refit::raster::{BinaryMask, Raster, ResponseMap};

pub const SIZE: usize = 128;

pub struct Phantom {
    pub image: Raster,
    pub gt: BinaryMask,
    pub cam: ResponseMap,
}

pub fn generate(count: usize, seed: u64) -> Vec<Phantom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| one(&mut rng)).collect()
}

fn one(rng: &mut ChaCha8Rng) -> Phantom {
    let (w, h) = (SIZE, SIZE);
    let cx = rng.gen_range(44.0..84.0);
    let cy = rng.gen_range(44.0..84.0);
    let a = rng.gen_range(15.0..35.0);
    let b = rng.gen_range(15.0..35.0);

    let mut gt = BinaryMask::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let dx = (x as f64 - cx) / a;
            let dy = (y as f64 - cy) / b;
            if dx * dx + dy * dy <= 1.0 {
                gt.set(x, y, 1);
            }
        }
    }

    // bright object on dark background with mild pixel noise
    let mut data = vec![0.0f32; w * h];
    for (i, v) in data.iter_mut().enumerate() {
        let base = if gt.bits()[i] == 1 { 0.85 } else { 0.15 };
        *v = (base + rng.gen_range(-0.02..0.02)) as f32;
    }
    let image = Raster::new(w, h, 1, data).unwrap();

    // response region: ground truth dilated by a Euclidean radius
    let radius = rng.gen_range(3i64..=7);
    let mut cam_mask = dilate(&gt, radius);

    // boundary-hugging noise: small disks centered on the dilated outline
    let outline = boundary_pixels(&cam_mask);
    let bumps = rng.gen_range(3usize..=8);
    for _ in 0..bumps {
        if outline.is_empty() {
            break;
        }
        let (bx, by) = outline[rng.gen_range(0..outline.len())];
        let r = rng.gen_range(1i64..=2);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (nx, ny) = (bx as i64 + dx, by as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    cam_mask.set(nx as usize, ny as usize, 1);
                }
            }
        }
    }

    // responses stay clear of the 0.5 cut on both sides
    let mut plane = vec![0.0f32; w * h];
    for (i, v) in plane.iter_mut().enumerate() {
        let base = if cam_mask.bits()[i] == 1 { 0.9 } else { 0.1 };
        *v = (base + rng.gen_range(-0.05..0.05)) as f32;
    }
    let cam = ResponseMap::new(w, h, 1, plane).unwrap();

    Phantom { image, gt, cam }
}

fn dilate(mask: &BinaryMask, radius: i64) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = mask.clone();
    // scan only the inflated bounding box of the foreground
    let (mut x0, mut y0, mut x1, mut y1) = (w as i64, h as i64, -1i64, -1i64);
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) == 1 {
                x0 = x0.min(x as i64);
                y0 = y0.min(y as i64);
                x1 = x1.max(x as i64);
                y1 = y1.max(y as i64);
            }
        }
    }
    if x1 < 0 {
        return out;
    }
    let r2 = radius * radius;
    for y in (y0 - radius).max(0)..=(y1 + radius).min(h as i64 - 1) {
        for x in (x0 - radius).max(0)..=(x1 + radius).min(w as i64 - 1) {
            if mask.get(x as usize, y as usize) == 1 {
                continue;
            }
            'scan: for dy in -radius..=radius {
                for dx in -radius..=radius {
                    if dx * dx + dy * dy > r2 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < h
                        && mask.get(nx as usize, ny as usize) == 1
                    {
                        out.set(x as usize, y as usize, 1);
                        break 'scan;
                    }
                }
            }
        }
    }
    out
}

fn boundary_pixels(mask: &BinaryMask) -> Vec<(usize, usize)> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) == 0 {
                continue;
            }
            let outer = (x > 0 && mask.get(x - 1, y) == 0)
                || (x + 1 < w && mask.get(x + 1, y) == 0)
                || (y > 0 && mask.get(x, y - 1) == 0)
                || (y + 1 < h && mask.get(x, y + 1) == 0);
            if outer {
                out.push((x, y));
            }
        }
    }
    out
}
