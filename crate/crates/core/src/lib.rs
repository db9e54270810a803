//! Multi-sphere image (MSI) fitting and 6DoF view synthesis from
//! omnidirectional stereo (ODS) panorama pairs.

// `!(a < b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

pub mod cli;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod imaging;
pub mod metrics;
pub mod msi;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};
