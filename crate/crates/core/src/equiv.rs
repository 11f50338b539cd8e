//! Scale-equivariance error of convolution stacks.
//!
//! For a stack `Phi` tapped at one block and a scale factor `s`,
//! `Delta = mean_i |T_s Phi(h_i) - Phi(T_s h_i)|^2 / |T_s Phi(h_i)|^2`, where `T_s`
//! is the bilinear scale transform about the image (or feature map) center and
//! both feature maps are cropped by a fixed margin before the norms are taken.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ses::{build_stack, Network, StackKind, StackSpec};
use crate::tensor::synth::derive_seed;
use crate::tensor::{grid_center, read_pgm, scale_transform, synth_corpus, BorderPolicy, Grid, SynthKind};

pub const DEFAULT_CROP: f64 = 0.1;
pub const DEFAULT_CALIBRATION_COUNT: usize = 4;
/// Stream index reserved for calibration images derived from the corpus seed.
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Scale factors of the default experiment: the two basis ratios of `alpha = 0.1`
/// followed by coarser downscalings.
pub const DEFAULT_SCALES: [f64; 5] = [1.0 / 1.2, 1.0 / 1.1, 0.8, 0.7, 0.6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    #[serde(default = "default_kind")]
    pub kind: SynthKind,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_height")]
    pub height: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default)]
    pub seed: u64,
    /// Read every `.pgm` in this directory (sorted by name) instead of synthesizing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_dir: Option<PathBuf>,
}

fn default_kind() -> SynthKind {
    SynthKind::GaussianBlobs
}
fn default_count() -> usize {
    20
}
fn default_height() -> usize {
    96
}
fn default_width() -> usize {
    320
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            count: default_count(),
            height: default_height(),
            width: default_width(),
            seed: 0,
            image_dir: None,
        }
    }
}

impl CorpusSpec {
    pub fn images(&self) -> Result<Vec<Grid>> {
        match &self.image_dir {
            Some(dir) => load_image_dir(dir),
            None => {
                if self.count == 0 {
                    return Err(Error::invalid("count", "corpus must contain at least one image"));
                }
                synth_corpus(self.kind, self.count, self.height, self.width, self.seed)
            }
        }
    }

    /// Images used to freeze normalization statistics: a separate synthetic draw
    /// of the same kind and size, or the first images of a directory corpus.
    pub fn calibration_images(&self, count: usize) -> Result<Vec<Grid>> {
        match &self.image_dir {
            Some(dir) => {
                let mut all = load_image_dir(dir)?;
                all.truncate(count.max(1));
                Ok(all)
            }
            None => synth_corpus(
                self.kind,
                count.max(1),
                self.height,
                self.width,
                derive_seed(self.seed, CALIBRATION_STREAM),
            ),
        }
    }
}

/// All `.pgm` files of a directory in name order.
pub fn load_image_dir(dir: &Path) -> Result<Vec<Grid>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid("image_dir", format!("no .pgm images in {}", dir.display())));
    }
    paths.iter().map(|p| Ok(read_pgm(p)?.0)).collect()
}

fn default_stacks() -> Vec<StackSpec> {
    let ses = StackSpec::new(StackKind::Ses, &[4, 4, 4, 4], 7, 0);
    vec![ses.clone(), ses.with_kind(StackKind::Vanilla)]
}
fn default_scales() -> Vec<f64> {
    DEFAULT_SCALES.to_vec()
}
fn default_blocks() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_crop() -> f64 {
    DEFAULT_CROP
}
fn default_calibration_count() -> usize {
    DEFAULT_CALIBRATION_COUNT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivConfig {
    #[serde(default = "default_stacks")]
    pub stacks: Vec<StackSpec>,
    #[serde(default)]
    pub corpus: CorpusSpec,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// 1-based block indices.
    #[serde(default = "default_blocks")]
    pub blocks: Vec<usize>,
    /// Fraction of each feature-map extent discarded on every side before measuring.
    #[serde(default = "default_crop")]
    pub crop: f64,
    #[serde(default = "default_calibration_count")]
    pub calibration_count: usize,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self {
            stacks: default_stacks(),
            corpus: CorpusSpec::default(),
            scales: default_scales(),
            blocks: default_blocks(),
            crop: DEFAULT_CROP,
            calibration_count: DEFAULT_CALIBRATION_COUNT,
        }
    }
}

impl EquivConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stacks.is_empty() {
            return Err(Error::invalid("stacks", "at least one stack is required"));
        }
        for spec in &self.stacks {
            spec.validate()?;
            if let Some(&b) = self.blocks.iter().find(|&&b| b == 0 || b > spec.layers.len()) {
                return Err(Error::invalid(
                    "blocks",
                    format!("block {b} outside 1..={} for a {} stack", spec.layers.len(), spec.kind),
                ));
            }
        }
        if self.blocks.is_empty() {
            return Err(Error::invalid("blocks", "at least one block is required"));
        }
        check_scales(&self.scales)?;
        check_crop(self.crop)?;
        if self.corpus.image_dir.is_none() && self.corpus.count == 0 {
            return Err(Error::invalid("count", "corpus must contain at least one image"));
        }
        Ok(())
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::invalid("scales", "at least one scale factor is required"));
    }
    if let Some(s) = scales.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
        return Err(Error::invalid("scales", format!("scale factors must lie in (0, 1], got {s}")));
    }
    Ok(())
}

fn check_crop(crop: f64) -> Result<()> {
    if !(0.0..0.5).contains(&crop) {
        return Err(Error::invalid("crop", format!("margin fraction must lie in [0, 0.5), got {crop}")));
    }
    Ok(())
}

/// `T_s` applied to every channel of a `[C, H, W]` map about its center.
pub fn scale_channels(x: &Grid, s: f64) -> Result<Grid> {
    let (h, w) = x.hw();
    let c = x.shape()[0];
    let center = grid_center(h, w);
    let planes = (0..c)
        .map(|i| scale_transform(&x.sub(i), s, center, BorderPolicy::WARP_DEFAULT))
        .collect::<Result<Vec<_>>>()?;
    Grid::stack(&planes)
}

fn crop_bounds(n: usize, crop: f64) -> (usize, usize) {
    let m = (crop * n as f64).floor() as usize;
    (m, n - m)
}

/// `(|a - b|^2, |a|^2)` over the cropped interior of two `[C, H, W]` maps.
fn cropped_norms(a: &Grid, b: &Grid, crop: f64) -> (f64, f64) {
    let (h, w) = a.hw();
    let (y0, y1) = crop_bounds(h, crop);
    let (x0, x1) = crop_bounds(w, crop);
    let (mut num, mut den) = (0.0, 0.0);
    for (pa, pb) in a.data().chunks_exact(h * w).zip(b.data().chunks_exact(h * w)) {
        for y in y0..y1 {
            for x in x0..x1 {
                let (va, vb) = (pa[y * w + x], pb[y * w + x]);
                num += (va - vb) * (va - vb);
                den += va * va;
            }
        }
    }
    (num, den)
}

/// Per-image ratios, indexed `[scale][block]`.
fn image_ratios(net: &Network, image: &Grid, scales: &[f64], blocks: &[usize], crop: f64) -> Result<Vec<Vec<f64>>> {
    let base = net.forward(image)?;
    let center = grid_center(image.hw().0, image.hw().1);
    scales
        .iter()
        .map(|&s| {
            let scaled = net.forward(&scale_transform(image, s, center, BorderPolicy::WARP_DEFAULT)?)?;
            blocks
                .iter()
                .map(|&b| {
                    let expected = scale_channels(&base[b - 1], s)?;
                    let (num, den) = cropped_norms(&expected, &scaled[b - 1], crop);
                    if den == 0.0 {
                        return Err(Error::ZeroDenominator(format!(
                            "block {b} of the {} stack produced an all-zero scaled feature map (s = {s})",
                            net.kind()
                        )));
                    }
                    Ok(num / den)
                })
                .collect()
        })
        .collect()
}

fn check_block(net: &Network, block: usize) -> Result<()> {
    if block == 0 || block > net.num_blocks() {
        return Err(Error::invalid("block", format!("{block} outside 1..={}", net.num_blocks())));
    }
    Ok(())
}

/// Mean ratios `[scale][block]` over a corpus; images run in parallel, summed in index order.
fn corpus_ratios(net: &Network, images: &[Grid], scales: &[f64], blocks: &[usize], crop: f64) -> Result<Vec<Vec<f64>>> {
    if images.is_empty() {
        return Err(Error::invalid("images", "corpus is empty"));
    }
    let per_image = images
        .par_iter()
        .map(|im| image_ratios(net, im, scales, blocks, crop))
        .collect::<Result<Vec<_>>>()?;
    let n = images.len() as f64;
    let mut mean = vec![vec![0.0; blocks.len()]; scales.len()];
    for ratios in &per_image {
        for (acc_row, row) in mean.iter_mut().zip(ratios) {
            for (acc, r) in acc_row.iter_mut().zip(row) {
                *acc += r;
            }
        }
    }
    for row in &mut mean {
        for v in row {
            *v /= n;
        }
    }
    Ok(mean)
}

/// Mean equivariance error of `net` at 1-based `block` for scale factor `s`,
/// with the default 10% crop margin.
pub fn equivariance_error(net: &Network, images: &[Grid], s: f64, block: usize) -> Result<f64> {
    equivariance_error_cropped(net, images, s, block, DEFAULT_CROP)
}

pub fn equivariance_error_cropped(net: &Network, images: &[Grid], s: f64, block: usize, crop: f64) -> Result<f64> {
    check_scales(&[s])?;
    check_crop(crop)?;
    check_block(net, block)?;
    Ok(corpus_ratios(net, images, &[s], &[block], crop)?[0][0])
}

/// Equivariance error of each image separately, indexed `[image][block]`.
pub fn per_image_errors(net: &Network, images: &[Grid], s: f64, blocks: &[usize], crop: f64) -> Result<Vec<Vec<f64>>> {
    check_scales(&[s])?;
    check_crop(crop)?;
    for &b in blocks {
        check_block(net, b)?;
    }
    images
        .par_iter()
        .map(|im| Ok(image_ratios(net, im, &[s], blocks, crop)?.remove(0)))
        .collect()
}

/// Per-pixel squared error summed over channels, divided by its maximum
/// (left all-zero when there is no error).
pub fn error_map(net: &Network, image: &Grid, s: f64, block: usize) -> Result<Grid> {
    check_scales(&[s])?;
    check_block(net, block)?;
    let base = &net.forward(image)?[block - 1];
    let center = grid_center(image.hw().0, image.hw().1);
    let scaled = &net.forward(&scale_transform(image, s, center, BorderPolicy::WARP_DEFAULT)?)?[block - 1];
    let expected = scale_channels(base, s)?;
    let (h, w) = base.hw();
    let mut map = Grid::zeros(&[h, w]);
    for (pa, pb) in expected.data().chunks_exact(h * w).zip(scaled.data().chunks_exact(h * w)) {
        for ((m, a), b) in map.data_mut().iter_mut().zip(pa).zip(pb) {
            *m += (a - b) * (a - b);
        }
    }
    let peak = map.max();
    Ok(if peak > 0.0 { map.scale(1.0 / peak) } else { map })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivRow {
    pub kind: StackKind,
    pub block: usize,
    pub scale: f64,
    pub delta: f64,
    pub log10_delta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivReport {
    pub rows: Vec<EquivRow>,
    pub crop: f64,
    pub calibration_count: usize,
}

impl EquivReport {
    pub const CSV_HEADER: &'static str = "kind,block,scale,delta,log10_delta,n";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.kind, r.block, r.scale, r.delta, r.log10_delta, r.n);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn delta(&self, kind: StackKind, block: usize, scale: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.block == block && r.scale == scale)
            .map(|r| r.delta)
    }
}

/// Build, calibrate and measure every stack of the config over the full
/// (stack, block, scale) cross product.
pub fn run_experiment(config: &EquivConfig) -> Result<EquivReport> {
    config.validate()?;
    let images = config.corpus.images()?;
    let calibration = config.corpus.calibration_images(config.calibration_count)?;
    let mut rows = Vec::with_capacity(config.stacks.len() * config.blocks.len() * config.scales.len());
    for spec in &config.stacks {
        let mut net = build_stack(spec)?;
        net.calibrate(&calibration)?;
        let mean = corpus_ratios(&net, &images, &config.scales, &config.blocks, config.crop)?;
        for (bi, &block) in config.blocks.iter().enumerate() {
            for (si, &scale) in config.scales.iter().enumerate() {
                let delta = mean[si][bi];
                rows.push(EquivRow {
                    kind: spec.kind,
                    block,
                    scale,
                    delta,
                    log10_delta: delta.log10(),
                    n: images.len(),
                });
            }
        }
    }
    Ok(EquivReport {
        rows,
        crop: config.crop,
        calibration_count: config.calibration_count,
    })
}
