//! Loading and saving of raster artifacts.
//!
//! Formats:
//! - images: 8-bit PNG (gray or RGB) and PGM (P2/P5), scaled to `[0, 1]`
//! - masks: 8-bit gray PNG, 0 ↦ 0 and 1 ↦ 255
//! - label maps: 16-bit gray PNG
//! - response maps: RFM, a little-endian binary with magic `RFM1`,
//!   `u32` width/height/classes and `f32` values row-major, plane-major

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap, Raster, ResponseMap};

const RFM_MAGIC: &[u8; 4] = b"RFM1";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::IoFailure {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::IoFailure {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an 8-bit PNG (gray or RGB) or PGM (P2/P5) image, scaling sample
/// values to `[0, 1]` by dividing by 255.
pub fn load_image(path: &Path) -> Result<Raster> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"\x89PNG") {
        png_image_from_bytes(&bytes, path)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        pgm_from_bytes(&bytes, path)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "expected PNG or PGM (P2/P5) magic".into(),
        })
    }
}

fn png_image_from_bytes(bytes: &[u8], path: &Path) -> Result<Raster> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().iter().map(|&v| v as f32 / 255.0).collect();
            Raster::new(w, h, 1, data)
        }
        DynamicImage::ImageRgb8(buf) => {
            let data = buf.into_raw().iter().map(|&v| v as f32 / 255.0).collect();
            Raster::new(w, h, 3, data)
        }
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("PNG color type {other:?} is not 8-bit gray or RGB"),
        }),
    }
}

fn pgm_from_bytes(bytes: &[u8], path: &Path) -> Result<Raster> {
    let corrupt = |detail: &str| Error::CorruptFile {
        path: path.to_path_buf(),
        detail: detail.into(),
    };

    let raw = bytes[0] == b'P' && bytes[1] == b'5';
    let mut pos = 2usize;

    let next_int = |pos: &mut usize| -> Result<u32> {
        // skip whitespace and '#' comments
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(corrupt("expected integer in PGM header"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("unparsable integer in PGM header"))
    };

    let width = next_int(&mut pos)? as usize;
    let height = next_int(&mut pos)? as usize;
    let maxval = next_int(&mut pos)?;
    if width == 0 || height == 0 {
        return Err(corrupt("zero PGM dimensions"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("PGM maxval {maxval} is not 8-bit"),
        });
    }

    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if raw {
        // exactly one whitespace byte separates the header from the samples
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(corrupt("missing separator before P5 samples"));
        }
        pos += 1;
        if bytes.len() < pos + n {
            return Err(corrupt("truncated P5 sample data"));
        }
        for &b in &bytes[pos..pos + n] {
            if b as u32 > maxval {
                return Err(corrupt("P5 sample exceeds maxval"));
            }
            data.push(b as f32 / 255.0);
        }
    } else {
        for _ in 0..n {
            let v = next_int(&mut pos)?;
            if v > maxval {
                return Err(corrupt("P2 sample exceeds maxval"));
            }
            data.push(v as f32 / 255.0);
        }
    }
    Raster::new(width, height, 1, data)
}

/// Loads an RFM response map, validating the `[0, 1]` range. Values outside
/// the range by at most 1e-6 are clamped; larger violations are errors.
pub fn load_response_map(path: &Path) -> Result<ResponseMap> {
    let bytes = read_bytes(path)?;
    if bytes.len() < 16 || &bytes[0..4] != RFM_MAGIC {
        return Err(Error::BadMagic(path.to_path_buf()));
    }
    let le_u32 = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let width = le_u32(4) as usize;
    let height = le_u32(8) as usize;
    let classes = le_u32(12) as usize;
    let n = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(classes))
        .ok_or_else(|| Error::DimensionMismatch("RFM dimensions overflow".into()))?;
    let payload = &bytes[16..];
    if payload.len() != n * 4 {
        return Err(Error::DimensionMismatch(format!(
            "RFM payload is {} bytes, header implies {}",
            payload.len(),
            n * 4
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ResponseMap::new(width, height, classes, values)
}

/// Writes a response map in RFM format.
pub fn save_response_map(map: &ResponseMap, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + map.classes() * map.width() * map.height() * 4);
    bytes.extend_from_slice(RFM_MAGIC);
    bytes.extend_from_slice(&(map.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.classes() as u32).to_le_bytes());
    for c in 0..map.classes() {
        for &v in map.plane(c) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_bytes(path, &bytes)
}

/// Saves a binary mask as an 8-bit gray PNG with 0 ↦ 0 and 1 ↦ 255.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
        mask.width() as u32,
        mask.height() as u32,
        mask.bits().iter().map(|&b| b * 255).collect(),
    )
    .expect("mask buffer size is consistent by construction");
    encode_png(path, &DynamicImage::ImageLuma8(buf))
}

/// Loads a binary mask saved by [`save_mask`]. Any pixel value other than
/// 0 or 255 is a [`Error::NonBinaryPixel`].
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = read_bytes(path)?;
    let img = image::load_from_memory(&bytes).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let buf = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("mask PNG color type {other:?} is not 8-bit gray"),
            })
        }
    };
    let mut bits = Vec::with_capacity(w * h);
    for (index, &value) in buf.as_raw().iter().enumerate() {
        match value {
            0 => bits.push(0),
            255 => bits.push(1),
            _ => {
                return Err(Error::NonBinaryPixel {
                    path: path.to_path_buf(),
                    index,
                    value,
                })
            }
        }
    }
    BinaryMask::new(w, h, bits)
}

/// Saves a label map as a 16-bit gray PNG. Requires `label_count <= 65536`.
pub fn save_label_map(labels: &LabelMap, path: &Path) -> Result<()> {
    if labels.label_count() > 65536 {
        return Err(Error::TooManyLabels(labels.label_count()));
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
        labels.width() as u32,
        labels.height() as u32,
        labels.labels().iter().map(|&l| l as u16).collect(),
    )
    .expect("label buffer size is consistent by construction");
    encode_png(path, &DynamicImage::ImageLuma16(buf))
}

/// Loads a label map saved by [`save_label_map`]. `label_count` is
/// reconstructed as `max label + 1`.
pub fn load_label_map(path: &Path) -> Result<LabelMap> {
    let bytes = read_bytes(path)?;
    let img = image::load_from_memory(&bytes).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let buf = match img {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("label PNG color type {other:?} is not 16-bit gray"),
            })
        }
    };
    let labels: Vec<u32> = buf.as_raw().iter().map(|&l| l as u32).collect();
    let label_count = labels.iter().copied().max().unwrap_or(0) + 1;
    LabelMap::new(w, h, labels, label_count)
}

fn encode_png(path: &Path, img: &DynamicImage) -> Result<()> {
    let mut bytes = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )
    .map_err(|e| Error::IoFailure {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    write_bytes(path, &bytes)
}
