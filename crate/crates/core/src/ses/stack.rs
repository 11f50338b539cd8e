use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{
    channel_norm, channel_norm_with, channel_values3, channel_values5, relu, scale_projection, se_norm,
    se_norm_with, ses_conv_input, ses_conv_scalewise, FeatureMap5, NormStats, DEFAULT_EPSILON,
};
use super::SesFilterBank;
use crate::basis::{build_basis_with, ScaleSet, DEFAULT_ALPHA, DEFAULT_MAX_ORDER, DEFAULT_PIXEL_SCALE};
use crate::error::{Error, Result};
use crate::tensor::{conv2d, BorderPolicy, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StackKind {
    Ses,
    Vanilla,
}

impl fmt::Display for StackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StackKind::Ses => "ses",
            StackKind::Vanilla => "vanilla",
        })
    }
}

impl FromStr for StackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ses" => Ok(StackKind::Ses),
            "vanilla" => Ok(StackKind::Vanilla),
            other => Err(Error::invalid("kind", format!("unknown stack kind `{other}` (expected ses or vanilla)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Relu,
    None,
}

/// Where normalization statistics come from.
///
/// `Calibrated` freezes per-channel statistics measured once on a calibration
/// corpus, so the network is a fixed function of its input (inference-mode
/// batch norm). `Instance` recomputes them for every input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    #[default]
    Calibrated,
    Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub out_channels: usize,
    pub k: usize,
    pub nonlinearity: Nonlinearity,
    /// Highest Hermite order of the basis; defaults to `min(6, k - 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
}

impl LayerSpec {
    pub fn new(out_channels: usize, k: usize, nonlinearity: Nonlinearity) -> Self {
        Self {
            out_channels,
            k,
            nonlinearity,
            max_order: None,
        }
    }

    pub fn effective_max_order(&self) -> u32 {
        self.max_order
            .unwrap_or_else(|| DEFAULT_MAX_ORDER.min(self.k.saturating_sub(1) as u32))
    }
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_num_scales() -> usize {
    3
}
fn default_pixel_scale() -> f64 {
    DEFAULT_PIXEL_SCALE
}
fn default_border() -> BorderPolicy {
    BorderPolicy::CONV_DEFAULT
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub kind: StackKind,
    pub layers: Vec<LayerSpec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_num_scales")]
    pub num_scales: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub norm: NormMode,
    #[serde(default = "default_pixel_scale")]
    pub pixel_scale: f64,
    #[serde(default = "default_border")]
    pub border: BorderPolicy,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl StackSpec {
    /// A stack of `channels.len()` layers with kernel extent `k`, ReLU between layers.
    pub fn new(kind: StackKind, channels: &[usize], k: usize, seed: u64) -> Self {
        Self {
            kind,
            layers: channels.iter().map(|&c| LayerSpec::new(c, k, Nonlinearity::Relu)).collect(),
            alpha: DEFAULT_ALPHA,
            num_scales: 3,
            seed,
            norm: NormMode::default(),
            pixel_scale: DEFAULT_PIXEL_SCALE,
            border: BorderPolicy::CONV_DEFAULT,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_kind(&self, kind: StackKind) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::invalid("layers", "a stack needs at least one layer"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.out_channels == 0 {
                return Err(Error::invalid("layers", format!("layer {i}: out_channels must be >= 1")));
            }
            if l.k == 0 || l.k % 2 == 0 {
                return Err(Error::invalid("layers", format!("layer {i}: k must be odd, got {}", l.k)));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        // Scale-set and basis parameters are validated by their constructors.
        ScaleSet::from_alpha(self.alpha, self.num_scales)?;
        Ok(())
    }

    fn scale_set(&self) -> Result<ScaleSet> {
        match self.kind {
            StackKind::Ses => ScaleSet::from_alpha(self.alpha, self.num_scales),
            StackKind::Vanilla => ScaleSet::new(vec![1.0]),
        }
    }
}

/// A forward-only stack of SES or vanilla convolution layers.
#[derive(Debug, Clone)]
pub struct Network {
    spec: StackSpec,
    banks: Vec<SesFilterBank>,
    stats: Option<Vec<NormStats>>,
}

/// Build a network with fan-in uniform weights drawn from `spec.seed`.
///
/// Both kinds draw identical weights; a vanilla stack uses only the unit-scale
/// kernels, which equal the unit-scale kernels of the SES stack bit for bit.
pub fn build_stack(spec: &StackSpec) -> Result<Network> {
    spec.validate()?;
    let scales = spec.scale_set()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut banks = Vec::with_capacity(spec.layers.len());
    let mut in_channels = 1;
    for layer in &spec.layers {
        let basis = Arc::new(build_basis_with(&scales, layer.effective_max_order(), layer.k, spec.pixel_scale)?);
        let b = basis.num_members();
        let a = 1.0 / ((in_channels * layer.k * layer.k) as f64).sqrt();
        let weights: Vec<f64> = (0..layer.out_channels * in_channels * b)
            .map(|_| rng.gen_range(-a..=a))
            .collect();
        let weights = Grid::new(&[layer.out_channels, in_channels, b], weights)?;
        banks.push(SesFilterBank::combine(weights, basis)?);
        in_channels = layer.out_channels;
    }
    Ok(Network {
        spec: spec.clone(),
        banks,
        stats: None,
    })
}

enum Features {
    Ses(FeatureMap5),
    Vanilla(Grid),
}

impl Network {
    pub fn spec(&self) -> &StackSpec {
        &self.spec
    }

    pub fn kind(&self) -> StackKind {
        self.spec.kind
    }

    pub fn banks(&self) -> &[SesFilterBank] {
        &self.banks
    }

    pub fn num_blocks(&self) -> usize {
        self.banks.len()
    }

    pub fn stats(&self) -> Option<&[NormStats]> {
        self.stats.as_deref()
    }

    pub fn is_calibrated(&self) -> bool {
        self.spec.norm == NormMode::Instance || self.stats.is_some() || self.num_blocks() == 1
    }

    fn conv(&self, layer: usize, x: Option<&Features>, image: &Grid) -> Result<Features> {
        let bank = &self.banks[layer];
        let border = self.spec.border;
        Ok(match (self.spec.kind, x) {
            (StackKind::Ses, None) => Features::Ses(ses_conv_input(image, bank, border)?),
            (StackKind::Ses, Some(Features::Ses(f))) => Features::Ses(ses_conv_scalewise(f, bank, border)?),
            (StackKind::Vanilla, None) => Features::Vanilla(conv2d(image, bank.kernels_at(0), border)?),
            (StackKind::Vanilla, Some(Features::Vanilla(f))) => Features::Vanilla(conv2d(f, bank.kernels_at(0), border)?),
            _ => unreachable!("feature kind always matches the stack kind"),
        })
    }

    fn norm_act(&self, layer: usize, x: Features, stats: Option<&NormStats>) -> Result<Features> {
        let eps = self.spec.epsilon;
        let act = self.spec.layers[layer].nonlinearity;
        let apply = |v: f64| match act {
            Nonlinearity::Relu => relu(v),
            Nonlinearity::None => v,
        };
        Ok(match x {
            Features::Ses(f) => {
                let n = match stats {
                    Some(s) => se_norm_with(&f, s, eps)?,
                    None => se_norm(&f, eps)?,
                };
                Features::Ses(n.map(apply))
            }
            Features::Vanilla(f) => {
                let n = match stats {
                    Some(s) => channel_norm_with(&f, s, eps)?,
                    None => channel_norm(&f, eps)?,
                };
                Features::Vanilla(n.map(apply))
            }
        })
    }

    fn project(x: &Features) -> Grid {
        match x {
            Features::Ses(f) => scale_projection(f),
            Features::Vanilla(f) => f.clone(),
        }
    }

    fn lift(image: &Grid) -> Result<Grid> {
        if image.rank() != 2 {
            return Err(Error::ShapeMismatch {
                context: "forward input",
                dim: "rank",
                expected: 2,
                actual: image.rank(),
            });
        }
        let (h, w) = image.hw();
        image.clone().reshape(&[1, h, w])
    }

    /// Measure frozen normalization statistics on a calibration corpus.
    ///
    /// Statistics for each normalization point are pooled over all calibration
    /// images, after earlier points have been normalized with their own frozen
    /// statistics. A no-op in instance mode.
    pub fn calibrate(&mut self, images: &[Grid]) -> Result<()> {
        if self.spec.norm == NormMode::Instance {
            return Ok(());
        }
        if images.is_empty() {
            return Err(Error::invalid("images", "calibration needs at least one image"));
        }
        let lifted = images.iter().map(Self::lift).collect::<Result<Vec<_>>>()?;
        let mut feats = lifted
            .iter()
            .map(|im| self.conv(0, None, im))
            .collect::<Result<Vec<_>>>()?;
        let mut stats = Vec::with_capacity(self.num_blocks().saturating_sub(1));
        for layer in 0..self.num_blocks() - 1 {
            let channels = self.banks[layer].out_channels();
            let values = match self.spec.kind {
                StackKind::Ses => channel_values5(
                    feats.iter().map(|f| match f {
                        Features::Ses(x) => x,
                        Features::Vanilla(_) => unreachable!(),
                    }),
                    channels,
                ),
                StackKind::Vanilla => channel_values3(
                    feats.iter().map(|f| match f {
                        Features::Vanilla(x) => x,
                        Features::Ses(_) => unreachable!(),
                    }),
                    channels,
                ),
            };
            let s = NormStats::from_channels(values);
            feats = feats
                .into_iter()
                .zip(&lifted)
                .map(|(f, im)| {
                    let n = self.norm_act(layer, f, Some(&s))?;
                    self.conv(layer + 1, Some(&n), im)
                })
                .collect::<Result<Vec<_>>>()?;
            stats.push(s);
        }
        self.stats = Some(stats);
        Ok(())
    }

    /// Install previously measured statistics (one entry per normalization point).
    pub fn set_stats(&mut self, stats: Vec<NormStats>) -> Result<()> {
        if stats.len() != self.num_blocks() - 1 {
            return Err(Error::invalid(
                "stats",
                format!("expected {} normalization points, got {}", self.num_blocks() - 1, stats.len()),
            ));
        }
        for (layer, s) in stats.iter().enumerate() {
            if s.channels() != self.banks[layer].out_channels() {
                return Err(Error::ShapeMismatch {
                    context: "set_stats",
                    dim: "channels",
                    expected: self.banks[layer].out_channels(),
                    actual: s.channels(),
                });
            }
        }
        self.stats = Some(stats);
        Ok(())
    }

    /// A copy whose layer `layer` (0-based) has all weights multiplied by `c`.
    /// Frozen statistics are kept as they are.
    pub fn with_scaled_weights(&self, layer: usize, c: f64) -> Result<Network> {
        let bank = self
            .banks
            .get(layer)
            .ok_or_else(|| Error::invalid("layer", format!("{layer} outside 0..{}", self.num_blocks())))?;
        let mut out = self.clone();
        out.banks[layer] = SesFilterBank::combine(bank.weights().scale(c), bank.basis().clone())?;
        Ok(out)
    }

    /// Per-block activations `[C, H, W]` for a rank-2 image. Block `b` is the
    /// output of convolution layer `b`, scale-projected for SES stacks.
    pub fn forward(&self, image: &Grid) -> Result<Vec<Grid>> {
        let frozen = match self.spec.norm {
            NormMode::Instance => None,
            NormMode::Calibrated if self.num_blocks() == 1 => None,
            NormMode::Calibrated => Some(self.stats.as_ref().ok_or(Error::NotCalibrated)?),
        };
        let input = Self::lift(image)?;
        let mut x = self.conv(0, None, &input)?;
        let mut blocks = vec![Self::project(&x)];
        for layer in 0..self.num_blocks() - 1 {
            let n = self.norm_act(layer, x, frozen.map(|s| &s[layer]))?;
            x = self.conv(layer + 1, Some(&n), &input)?;
            blocks.push(Self::project(&x));
        }
        Ok(blocks)
    }
}
