use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use seslab_core::basis::{build_basis_with, ScaleSet, DEFAULT_ALPHA, DEFAULT_K, DEFAULT_MAX_ORDER, DEFAULT_PIXEL_SCALE};

use crate::error::CliResult;
use crate::output::{echo_config, ensure_dir, load_config, resolve_out_dir};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Scale step: member scales are 1/(1+alpha)^i relative to the largest.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of scales (1 to 3).
    #[arg(long)]
    scales: Option<usize>,
    /// Highest Hermite order per axis; the basis has (order+1)^2 members.
    #[arg(long)]
    order: Option<u32>,
    /// Odd filter extent in pixels.
    #[arg(long)]
    k: Option<usize>,
    /// Pixels per unit of sigma.
    #[arg(long)]
    pixel_scale: Option<f64>,
    /// Raw tensor path; a JSON sidecar is written next to it.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub alpha: f64,
    pub scales: usize,
    pub order: u32,
    pub k: usize,
    pub pixel_scale: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            scales: 3,
            order: DEFAULT_MAX_ORDER,
            k: DEFAULT_K,
            pixel_scale: DEFAULT_PIXEL_SCALE,
        }
    }
}

pub fn run(global: &GlobalArgs, args: BasisArgs) -> CliResult<()> {
    let mut config: BasisConfig = load_config(global.config.as_deref())?;
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.scales {
        config.scales = v;
    }
    if let Some(v) = args.order {
        config.order = v;
    }
    if let Some(v) = args.k {
        config.k = v;
    }
    if let Some(v) = args.pixel_scale {
        config.pixel_scale = v;
    }

    let scales = ScaleSet::from_alpha(config.alpha, config.scales)?;
    let basis = build_basis_with(&scales, config.order, config.k, config.pixel_scale)?;

    let dir = resolve_out_dir(global.out_dir.as_deref(), Some(&args.out));
    ensure_dir(&dir)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    echo_config(&dir, "basis", &config)?;
    basis.export(&args.out)?;
    println!(
        "basis shape {:?} (sigmas {:?}), written to {}",
        basis.filters().shape(),
        scales.sigmas(),
        args.out.display()
    );
    Ok(())
}
