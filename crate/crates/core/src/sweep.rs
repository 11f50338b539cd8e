//! Round-trip SSIM of the log-polar transform over image heights and upscaling factors.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::log_polar_roundtrip_ssim;
use crate::tensor::{synth_corpus, SynthKind};

/// Width-to-height ratio of the synthetic sweep images (a wide road-scene frame).
pub const DEFAULT_ASPECT: f64 = 10.0 / 3.0;

fn default_heights() -> Vec<usize> {
    vec![96, 384]
}
fn default_up_factors() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0]
}
fn default_kind() -> SynthKind {
    SynthKind::BandlimitedNoise
}
fn default_count() -> usize {
    20
}
fn default_aspect() -> f64 {
    DEFAULT_ASPECT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_heights")]
    pub heights: Vec<usize>,
    #[serde(default = "default_up_factors")]
    pub up_factors: Vec<f64>,
    #[serde(default = "default_kind")]
    pub kind: SynthKind,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_aspect")]
    pub aspect: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            heights: default_heights(),
            up_factors: default_up_factors(),
            kind: default_kind(),
            count: default_count(),
            aspect: DEFAULT_ASPECT,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count", "corpus must contain at least one image"));
        }
        if self.heights.is_empty() || self.up_factors.is_empty() {
            return Err(Error::invalid("sweep", "heights and up_factors must be non-empty"));
        }
        if let Some(u) = self.up_factors.iter().find(|&&u| !(u >= 1.0) || !u.is_finite()) {
            return Err(Error::invalid("up_factors", format!("must be finite and >= 1, got {u}")));
        }
        if !(self.aspect > 0.0) || !self.aspect.is_finite() {
            return Err(Error::invalid("aspect", format!("must be finite and > 0, got {}", self.aspect)));
        }
        Ok(())
    }

    pub fn width_for(&self, height: usize) -> usize {
        (height as f64 * self.aspect).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub height: usize,
    pub up_factor: f64,
    pub mean_ssim: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "height,up_factor,mean_ssim,n";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.height, r.up_factor, r.mean_ssim, r.n);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn mean_ssim(&self, height: usize, up_factor: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.height == height && r.up_factor == up_factor)
            .map(|r| r.mean_ssim)
    }
}

/// Mean round-trip SSIM for every (height, up_factor). The same seeds are used
/// at every height, so each height sees the same scenes at a different resolution.
pub fn ssim_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.heights.len() * config.up_factors.len());
    for &height in &config.heights {
        let images = synth_corpus(config.kind, config.count, height, config.width_for(height), config.seed)?;
        for &up in &config.up_factors {
            let scores = images
                .par_iter()
                .map(|im| log_polar_roundtrip_ssim(im, up))
                .collect::<Result<Vec<_>>>()?;
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            rows.push(SweepRow {
                height,
                up_factor: up,
                mean_ssim: mean,
                n: scores.len(),
            });
        }
    }
    Ok(SweepReport { rows })
}
