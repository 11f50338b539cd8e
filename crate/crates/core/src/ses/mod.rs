//! Scale-equivariant steerable (SES) convolution layers and small comparison stacks.
//!
//! An SES layer synthesizes one kernel per basis scale from a single set of
//! weights and stacks the per-scale responses along a new scale axis, giving
//! `[S, C, H, W]` feature maps. Deeper layers convolve each scale slice with
//! the kernels of its own scale.

mod bank;
mod layers;
mod stack;

pub use bank::SesFilterBank;
pub use layers::{
    channel_norm, channel_norm_with, channel_values3, channel_values5, relu, scale_projection, se_norm,
    se_norm_with, se_pool, ses_conv_input, ses_conv_scalewise, FeatureMap5, NormStats, PoolMode,
    DEFAULT_EPSILON,
};
pub use stack::{build_stack, LayerSpec, Network, NormMode, Nonlinearity, StackKind, StackSpec};
