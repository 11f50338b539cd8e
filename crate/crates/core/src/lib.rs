//! Scale-equivariant steerable convolutions and the projective geometry that
//! motivates them: depth translation of a camera in front of a planar patch
//! acts on the image as a scaling about the principal point.
//!
//! Modules, bottom up:
//! - [`tensor`]: dense grids, correlation, bilinear warps, SSIM, synthetic images, file I/O
//! - [`basis`]: the multi-scale Hermite-Gaussian basis
//! - [`ses`]: SES convolution layers and comparison stacks
//! - [`geometry`]: the planar projective warp, its scale reduction, log-polar transforms
//! - [`equiv`]: equivariance-error measurement
//! - [`sweep`]: log-polar round-trip SSIM sweeps

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod equiv;
pub mod error;
pub mod geometry;
pub mod ses;
pub mod sweep;
pub mod tensor;

pub use error::{Error, Result};
