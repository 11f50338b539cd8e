use serde::{Deserialize, Serialize};

use super::SesFilterBank;
use crate::error::{Error, Result};
use crate::tensor::{conv2d, BorderPolicy, Grid};

pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Scale-stacked feature map `[S, C, H, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap5(Grid);

impl FeatureMap5 {
    pub fn new(data: Grid) -> Result<Self> {
        if data.rank() != 4 {
            return Err(Error::ShapeMismatch {
                context: "FeatureMap5",
                dim: "rank",
                expected: 4,
                actual: data.rank(),
            });
        }
        Ok(Self(data))
    }

    /// Stack `[C, H, W]` slices along a new scale axis.
    pub fn from_slices(slices: &[Grid]) -> Result<Self> {
        Self::new(Grid::stack(slices)?)
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }

    pub fn num_scales(&self) -> usize {
        self.0.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.0.shape()[1]
    }

    pub fn hw(&self) -> (usize, usize) {
        self.0.hw()
    }

    /// Scale slice `s` as `[C, H, W]`.
    pub fn scale_slice(&self, s: usize) -> Grid {
        self.0.sub(s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.map(f))
    }
}

/// Lift an input `[C, H, W]` to scale-stacked features: one convolution per basis scale.
pub fn ses_conv_input(input: &Grid, bank: &SesFilterBank, border: BorderPolicy) -> Result<FeatureMap5> {
    let slices = (0..bank.num_scales())
        .map(|s| conv2d(input, bank.kernels_at(s), border))
        .collect::<Result<Vec<_>>>()?;
    FeatureMap5::from_slices(&slices)
}

/// Convolve each scale slice with the kernels of its own scale (no scale mixing).
pub fn ses_conv_scalewise(input: &FeatureMap5, bank: &SesFilterBank, border: BorderPolicy) -> Result<FeatureMap5> {
    if input.num_scales() != bank.num_scales() {
        return Err(Error::ShapeMismatch {
            context: "ses_conv_scalewise",
            dim: "scales",
            expected: bank.num_scales(),
            actual: input.num_scales(),
        });
    }
    let slices = (0..bank.num_scales())
        .map(|s| conv2d(&input.scale_slice(s), bank.kernels_at(s), border))
        .collect::<Result<Vec<_>>>()?;
    FeatureMap5::from_slices(&slices)
}

/// Elementwise max over the scale axis, `[S, C, H, W] -> [C, H, W]`.
pub fn scale_projection(x: &FeatureMap5) -> Grid {
    let mut out = x.scale_slice(0);
    for s in 1..x.num_scales() {
        for (o, &v) in out.data_mut().iter_mut().zip(x.grid().slice(s)) {
            if v > *o {
                *o = v;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    Max,
    Avg,
}

/// Spatial pooling applied to each scale slice independently: window and stride
/// `window`, output `ceil(H / window) x ceil(W / window)`, with positions past the
/// edge reading the clamped border pixel.
pub fn se_pool(x: &FeatureMap5, window: usize, mode: PoolMode) -> Result<FeatureMap5> {
    if window < 1 {
        return Err(Error::invalid("window", "pooling window must be >= 1"));
    }
    if window == 1 {
        return Ok(x.clone());
    }
    let shape = x.grid().shape();
    let (s, c, h, w) = (shape[0], shape[1], shape[2], shape[3]);
    let (oh, ow) = (h.div_ceil(window), w.div_ceil(window));
    let mut out = Vec::with_capacity(s * c * oh * ow);
    let norm = (window * window) as f64;
    for plane in x.grid().data().chunks_exact(h * w) {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = match mode {
                    PoolMode::Max => f64::NEG_INFINITY,
                    PoolMode::Avg => 0.0,
                };
                for dy in 0..window {
                    let y = (oy * window + dy).min(h - 1);
                    for dx in 0..window {
                        let v = plane[y * w + (ox * window + dx).min(w - 1)];
                        match mode {
                            PoolMode::Max => acc = acc.max(v),
                            PoolMode::Avg => acc += v,
                        }
                    }
                }
                out.push(if mode == PoolMode::Avg { acc / norm } else { acc });
            }
        }
    }
    FeatureMap5::new(Grid::new(&[s, c, oh, ow], out)?)
}

/// Per-channel normalization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl NormStats {
    /// Population mean and variance of each channel's values.
    ///
    /// Values are summed in sorted order, so the result depends only on the
    /// multiset of values: any permutation of the inputs (a circular shift,
    /// a different image order) gives bit-identical statistics.
    pub fn from_channels(channels: Vec<Vec<f64>>) -> Self {
        let (mut mean, mut var) = (Vec::new(), Vec::new());
        for mut values in channels {
            values.sort_unstable_by(f64::total_cmp);
            let n = values.len() as f64;
            let m = values.iter().sum::<f64>() / n;
            let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean.push(m);
            var.push(v);
        }
        Self { mean, var }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

/// Gather each channel's values from `[S, C, H, W]` maps (over scale and space).
pub fn channel_values5<'a>(maps: impl IntoIterator<Item = &'a FeatureMap5>, channels: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); channels];
    for x in maps {
        for s in 0..x.num_scales() {
            for (c, plane) in x.scale_slice(s).data().chunks_exact(x.hw().0 * x.hw().1).enumerate() {
                out[c].extend_from_slice(plane);
            }
        }
    }
    out
}

/// Gather each channel's values from `[C, H, W]` maps (over space).
pub fn channel_values3<'a>(maps: impl IntoIterator<Item = &'a Grid>, channels: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); channels];
    for x in maps {
        let plane = x.slice_len();
        for (c, values) in x.data().chunks_exact(plane).enumerate() {
            out[c].extend_from_slice(values);
        }
    }
    out
}

fn check_stats(stats: &NormStats, channels: usize, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", format!("must be > 0, got {epsilon}")));
    }
    if stats.channels() != channels {
        return Err(Error::ShapeMismatch {
            context: "normalization statistics",
            dim: "channels",
            expected: channels,
            actual: stats.channels(),
        });
    }
    Ok(())
}

fn normalize_planes(data: &mut [f64], plane: usize, channels: usize, stats: &NormStats, epsilon: f64) {
    for (i, chunk) in data.chunks_exact_mut(plane).enumerate() {
        let c = i % channels;
        let (m, inv) = (stats.mean[c], 1.0 / (stats.var[c] + epsilon).sqrt());
        for v in chunk {
            *v = (*v - m) * inv;
        }
    }
}

/// `(x - mean) / sqrt(var + epsilon)` with the given per-channel statistics.
pub fn se_norm_with(x: &FeatureMap5, stats: &NormStats, epsilon: f64) -> Result<FeatureMap5> {
    check_stats(stats, x.channels(), epsilon)?;
    let (h, w) = x.hw();
    let mut g = x.grid().clone();
    normalize_planes(g.data_mut(), h * w, x.channels(), stats, epsilon);
    FeatureMap5::new(g)
}

/// Instance normalization with statistics taken jointly over scale and space per channel.
pub fn se_norm(x: &FeatureMap5, epsilon: f64) -> Result<FeatureMap5> {
    let stats = NormStats::from_channels(channel_values5([x], x.channels()));
    se_norm_with(x, &stats, epsilon)
}

/// Per-channel normalization of a `[C, H, W]` map with the given statistics.
pub fn channel_norm_with(x: &Grid, stats: &NormStats, epsilon: f64) -> Result<Grid> {
    if x.rank() != 3 {
        return Err(Error::ShapeMismatch {
            context: "channel_norm",
            dim: "rank",
            expected: 3,
            actual: x.rank(),
        });
    }
    check_stats(stats, x.shape()[0], epsilon)?;
    let mut g = x.clone();
    normalize_planes(g.data_mut(), x.slice_len(), x.shape()[0], stats, epsilon);
    Ok(g)
}

/// Instance normalization of a `[C, H, W]` map over space per channel.
pub fn channel_norm(x: &Grid, epsilon: f64) -> Result<Grid> {
    if x.rank() != 3 {
        return Err(Error::ShapeMismatch {
            context: "channel_norm",
            dim: "rank",
            expected: 3,
            actual: x.rank(),
        });
    }
    let stats = NormStats::from_channels(channel_values3([x], x.shape()[0]));
    channel_norm_with(x, &stats, epsilon)
}

pub fn relu(v: f64) -> f64 {
    v.max(0.0)
}
