//! Refinement of weakly supervised segmentation masks.
//!
//! The pipeline: partition an image into superpixels ([`superpixels`]),
//! derive an edge map of boundary-closed clusters ([`edgemap`]), then keep
//! only the clusters that lie completely inside a thresholded class
//! response map ([`boundary_fit`]). [`metrics`] scores the results with
//! Dice and mean-IoU reports, and [`io`] handles the on-disk formats.
//!
//! All operations are pure and deterministic; batch callers may freely
//! parallelize per image without changing any output.

pub mod boundary_fit;
pub mod edgemap;
pub mod error;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod superpixels;

pub use error::{Error, Result};
