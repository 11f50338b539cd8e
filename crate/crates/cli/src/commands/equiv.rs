use std::path::PathBuf;

use clap::Args;
use seslab_core::equiv::{error_map, run_experiment, EquivConfig};
use seslab_core::ses::build_stack;
use seslab_core::tensor::{write_pgm, SynthKind};

use super::{parse_list, parse_ratio};
use crate::error::{CliError, CliResult};
use crate::output::{echo_config, ensure_dir, load_config, resolve_out_dir, write_text};
use crate::{Format, GlobalArgs};

#[derive(Debug, Args)]
pub struct EquivArgs {
    /// Report path; defaults to `<out-dir>/equiv.<format>`.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Measure on the `.pgm` images of this directory instead of a synthetic corpus.
    #[arg(long, value_name = "DIR")]
    image_dir: Option<PathBuf>,
    /// Synthetic corpus kind: gaussian-blobs, checkerboard or bandlimited-noise.
    #[arg(long)]
    corpus: Option<String>,
    /// Number of synthetic images.
    #[arg(long)]
    count: Option<usize>,
    /// Synthetic image size as HxW, e.g. `96x320`.
    #[arg(long)]
    size: Option<String>,
    /// Comma-separated 1-based block indices.
    #[arg(long)]
    blocks: Option<String>,
    /// Comma-separated scale factors in (0, 1]; fractions such as `1/1.2` are accepted.
    #[arg(long)]
    scales: Option<String>,
    /// Also write one normalized error map per (stack, block, scale) for the first image.
    #[arg(long, value_name = "DIR")]
    error_maps: Option<PathBuf>,
}

fn parse_size(value: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("--size: expected HxW, got `{value}`"));
    let (h, w) = value.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
}

fn apply_overrides(config: &mut EquivConfig, global: &GlobalArgs, args: &EquivArgs) -> CliResult<()> {
    if let Some(dir) = &args.image_dir {
        config.corpus.image_dir = Some(dir.clone());
    }
    if let Some(v) = &args.corpus {
        config.corpus.kind = v.parse::<SynthKind>()?;
    }
    if let Some(v) = args.count {
        config.corpus.count = v;
    }
    if let Some(v) = &args.size {
        (config.corpus.height, config.corpus.width) = parse_size(v)?;
    }
    if let Some(v) = &args.blocks {
        config.blocks = parse_list("blocks", v)?;
    }
    if let Some(v) = &args.scales {
        config.scales = parse_list::<String>("scales", v)?
            .iter()
            .map(|s| parse_ratio("scales", s))
            .collect::<CliResult<_>>()?;
    }
    if let Some(seed) = global.seed {
        config.corpus.seed = seed;
        for stack in &mut config.stacks {
            stack.seed = seed;
        }
    }
    Ok(())
}

fn write_error_maps(config: &EquivConfig, dir: &std::path::Path) -> CliResult<()> {
    ensure_dir(dir)?;
    let image = config
        .corpus
        .images()?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::usage("the corpus is empty"))?;
    let calibration = config.corpus.calibration_images(config.calibration_count)?;
    for spec in &config.stacks {
        let mut net = build_stack(spec)?;
        net.calibrate(&calibration)?;
        for &block in &config.blocks {
            for (si, &s) in config.scales.iter().enumerate() {
                let map = error_map(&net, &image, s, block)?;
                let path = dir.join(format!("{}_block{block}_scale{si}.pgm", spec.kind));
                write_pgm(&path, &map, 255)?;
            }
        }
    }
    Ok(())
}

pub fn run(global: &GlobalArgs, args: EquivArgs) -> CliResult<()> {
    let mut config: EquivConfig = load_config(global.config.as_deref())?;
    apply_overrides(&mut config, global, &args)?;
    config.validate()?;

    let dir = resolve_out_dir(global.out_dir.as_deref(), args.out.as_deref());
    ensure_dir(&dir)?;
    echo_config(&dir, "equiv", &config)?;
    let report = run_experiment(&config)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| dir.join(format!("equiv.{}", global.format.extension())));
    let text = match global.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    write_text(&out, &text)?;
    if let Some(maps) = &args.error_maps {
        write_error_maps(&config, maps)?;
    }
    println!("{} rows written to {}", report.rows.len(), out.display());
    Ok(())
}
