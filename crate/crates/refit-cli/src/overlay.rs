//! Mask-over-image rendering: per-mask fill at a configurable opacity plus
//! a solid contour along the mask's boundary pixels.

use image::RgbImage;

use refit::edgemap::build_edge_map;
use refit::error::{Error, Result};
use refit::raster::{BinaryMask, LabelMap, Raster};

// palette of visually distinct colors, cycled per mask
const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [70, 240, 240],
    [245, 130, 48],
    [240, 50, 230],
];

pub fn render_overlay(image: &Raster, masks: &[BinaryMask], alpha: f64) -> Result<RgbImage> {
    let (w, h) = (image.width(), image.height());
    for m in masks {
        if m.width() != w || m.height() != h {
            return Err(Error::DimensionMismatch(format!(
                "overlay: image {w}x{h} vs mask {}x{}",
                m.width(),
                m.height()
            )));
        }
    }
    let mut canvas: Vec<[f64; 3]> = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let px = image.pixel(x, y);
            if image.channels() == 1 {
                [px[0] as f64; 3]
            } else {
                [px[0] as f64, px[1] as f64, px[2] as f64]
            }
        })
        .collect();

    for (mi, mask) in masks.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()].map(|c| c as f64 / 255.0);
        let labels = LabelMap::new(
            w,
            h,
            mask.bits().iter().map(|&b| b as u32).collect(),
            2,
        )?;
        let boundary = build_edge_map(&labels, false);
        for (i, px) in canvas.iter_mut().enumerate() {
            if mask.bits()[i] == 0 {
                continue;
            }
            let contour = boundary.boundary().bits()[i] == 1;
            for (c, chan) in px.iter_mut().enumerate() {
                *chan = if contour {
                    color[c]
                } else {
                    (1.0 - alpha) * *chan + alpha * color[c]
                };
            }
        }
    }

    let mut out = RgbImage::new(w as u32, h as u32);
    for (i, px) in canvas.iter().enumerate() {
        let rgb = px.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8);
        out.put_pixel((i % w) as u32, (i / w) as u32, image::Rgb(rgb));
    }
    Ok(out)
}
