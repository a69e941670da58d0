//! Error type shared by every module in the crate.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    NotFound(PathBuf),

    #[error("unsupported format for {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("corrupt file {path}: {detail}")]
    CorruptFile { path: PathBuf, detail: String },

    #[error("bad magic in {0}: expected \"RFM1\"")]
    BadMagic(PathBuf),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value {value} at index {index} outside [0,1] beyond tolerance")]
    RangeViolation { index: usize, value: f32 },

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-binary pixel value {value} at index {index} in {path}")]
    NonBinaryPixel {
        path: PathBuf,
        index: usize,
        value: u8,
    },

    #[error("label count {0} exceeds the 65536 labels a 16-bit map can hold")]
    TooManyLabels(u32),

    #[error("k = {k} exceeds pixel count {pixels}")]
    KTooLarge { k: u32, pixels: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("empty search space: {0}")]
    EmptySpace(String),

    #[error("misaligned inputs: {0}")]
    MisalignedInputs(String),

    #[error("class index {index} out of range for {classes} classes")]
    BadClassIndex { index: usize, classes: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u32, classes: u32 },

    #[error("empty input: {0}")]
    EmptyInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
