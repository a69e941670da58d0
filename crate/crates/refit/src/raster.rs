//! Core raster domain types: images, response maps, binary masks and label maps.
//!
//! All grids are row-major; the value for pixel `(x, y)` lives at index
//! `y * width + x`. Construction validates the type invariants so that any
//! value of these types held by downstream code is known to be well-formed.

use crate::error::{Error, Result};

/// H×W grid of scalar or multi-channel finite values. Carrier for input
/// images; loaded images are scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Raster {
    /// Builds a raster, checking dimensions and that every value is finite.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParams(format!(
                "raster channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "raster data length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "raster value at index {pos} is not finite"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Channel values of pixel `(x, y)` as a slice of length `channels`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let base = (y * self.width + x) * self.channels;
        &self.data[base..base + self.channels]
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Single-channel luminance view: `0.299 R + 0.587 G + 0.114 B`.
    /// A 1-channel raster is returned unchanged.
    pub fn to_gray(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

/// Per-class activation grids with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    width: usize,
    height: usize,
    classes: usize,
    planes: Vec<f32>,
}

impl ResponseMap {
    /// Builds a response map from `classes` plane-major row-major grids.
    /// Values outside `[0, 1]` by at most `1e-6` are clamped; larger
    /// violations (including NaN) are a [`Error::RangeViolation`].
    pub fn new(width: usize, height: usize, classes: usize, mut planes: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || classes == 0 {
            return Err(Error::DimensionMismatch(format!(
                "response map needs positive dimensions, got {width}x{height}, {classes} classes"
            )));
        }
        if planes.len() != width * height * classes {
            return Err(Error::DimensionMismatch(format!(
                "response data length {} != {classes}x{height}x{width}",
                planes.len()
            )));
        }
        const TOL: f32 = 1e-6;
        for (index, v) in planes.iter_mut().enumerate() {
            if !(*v >= -TOL && *v <= 1.0 + TOL) {
                return Err(Error::RangeViolation { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self {
            width,
            height,
            classes,
            planes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Row-major grid for one class.
    pub fn plane(&self, class_idx: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.planes[class_idx * n..(class_idx + 1) * n]
    }

    pub fn get(&self, class_idx: usize, x: usize, y: usize) -> f32 {
        self.planes[class_idx * self.width * self.height + y * self.width + x]
    }
}

/// Per-pixel {0,1} segmentation mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask data length {} != {width}x{height}",
                bits.len()
            )));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParams(format!(
                "mask value {} at index {pos} is not 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// All-zero mask.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    /// All-one mask.
    pub fn ones(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![1; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        debug_assert!(value <= 1);
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn same_dims(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Per-pixel region labels. Invariant: every label is `< label_count`;
/// [`LabelMap::compact`] renumbers labels to the contiguous range
/// `0..distinct` in row-major first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    label_count: u32,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>, label_count: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams(format!(
                "label map dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "label data length {} != {width}x{height}",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_count) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: label_count,
            });
        }
        Ok(Self {
            width,
            height,
            labels,
            label_count,
        })
    }

    /// Single-region map labelling every pixel 0.
    pub fn uniform(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width * height],
            label_count: 1,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_count(&self) -> u32 {
        self.label_count
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn same_dims_mask(&self, mask: &BinaryMask) -> bool {
        self.width == mask.width() && self.height == mask.height()
    }

    /// Renumbers labels to `0..m` in row-major first-appearance order and
    /// sets `label_count` to the number of distinct labels.
    pub fn compact(&self) -> LabelMap {
        let mut remap = vec![u32::MAX; self.label_count as usize];
        let mut next = 0u32;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if remap[l as usize] == u32::MAX {
                    remap[l as usize] = next;
                    next += 1;
                }
                remap[l as usize]
            })
            .collect();
        LabelMap {
            width: self.width,
            height: self.height,
            labels,
            label_count: next,
        }
    }
}
