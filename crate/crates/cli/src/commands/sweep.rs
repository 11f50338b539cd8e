use std::path::PathBuf;

use clap::Args;
use seslab_core::sweep::{ssim_sweep, SweepConfig};
use seslab_core::tensor::SynthKind;

use super::{parse_list, parse_ratio};
use crate::error::{CliError, CliResult};
use crate::output::{echo_config, ensure_dir, load_config, resolve_out_dir, write_text};
use crate::{Format, GlobalArgs};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated image heights, e.g. `96,192,384`.
    #[arg(long)]
    heights: Option<String>,
    /// Comma-separated upscaling factors, e.g. `1,2,3,4`.
    #[arg(long)]
    up_factors: Option<String>,
    /// Synthetic corpus kind: gaussian-blobs, checkerboard or bandlimited-noise.
    #[arg(long)]
    corpus: Option<String>,
    /// Images per height.
    #[arg(long)]
    count: Option<usize>,
    /// Width to height ratio of the corpus images.
    #[arg(long)]
    aspect: Option<String>,
    /// Report path; defaults to `<out-dir>/ssim_sweep.<format>`.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn run(global: &GlobalArgs, args: SweepArgs) -> CliResult<()> {
    let mut config: SweepConfig = load_config(global.config.as_deref())?;
    if let Some(v) = &args.heights {
        config.heights = parse_list("heights", v)?;
    }
    if let Some(v) = &args.up_factors {
        config.up_factors = parse_list::<String>("up-factors", v)?
            .iter()
            .map(|s| parse_ratio("up-factors", s))
            .collect::<CliResult<_>>()?;
    }
    if let Some(v) = &args.corpus {
        config.kind = v.parse::<SynthKind>()?;
    }
    if let Some(v) = args.count {
        config.count = v;
    }
    if let Some(v) = &args.aspect {
        config.aspect = parse_ratio("aspect", v)?;
    }
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if config.count == 0 {
        return Err(CliError::usage("the corpus is empty: --count must be at least 1"));
    }
    config.validate()?;

    let dir = resolve_out_dir(global.out_dir.as_deref(), args.out.as_deref());
    ensure_dir(&dir)?;
    echo_config(&dir, "ssim-sweep", &config)?;
    let report = ssim_sweep(&config)?;
    let out = args
        .out
        .unwrap_or_else(|| dir.join(format!("ssim_sweep.{}", global.format.extension())));
    let text = match global.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    write_text(&out, &text)?;
    println!("{} rows written to {}", report.rows.len(), out.display());
    Ok(())
}
