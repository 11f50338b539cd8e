use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use seslab_core::geometry::{
    corollary_deviation, inverse_log_polar, log_polar, parallel_bound, projective_mapping, scale_factor,
    CameraIntrinsics, EgoMotion, LogPolar, PatchPlane,
};
use seslab_core::tensor::{read_pgm, scale_transform, warp, write_pgm, BorderPolicy, Grid};

use crate::error::{CliError, CliResult};
use crate::output::{echo_config, ensure_dir, json_arg, load_config, resolve_out_dir, write_text};
use crate::GlobalArgs;

/// Focal length assumed when no intrinsics are given (KITTI's, in pixels).
const DEFAULT_FOCAL: f64 = 707.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WarpMode {
    /// Exact planar-patch map for a general camera motion.
    Projective,
    /// Scale about the principal point induced by the depth component of the motion.
    Scale,
    /// Cartesian image to (angle, log radius) image.
    Logpolar,
    /// (angle, log radius) image back to Cartesian.
    Invlogpolar,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    /// Input PGM image.
    #[arg(long, value_name = "FILE")]
    image: Option<PathBuf>,
    /// Patch plane `{"m":..,"n":..,"o":..,"p":..}`, inline or as a file path.
    #[arg(long, value_name = "JSON")]
    plane: Option<String>,
    /// Ego motion `{"r":[[..],[..],[..]],"t":[..]}`, inline or as a file path.
    #[arg(long, value_name = "JSON")]
    motion: Option<String>,
    /// Intrinsics `{"f":..,"u0":..,"v0":..,"width":..,"height":..}`; defaults to f = 707 centered on the image.
    #[arg(long, value_name = "JSON")]
    intrinsics: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<WarpMode>,
    /// Output PGM; geometry numbers go to the same path with a `.json` extension.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WarpConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<WarpMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane: Option<PatchPlane>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motion: Option<EgoMotion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<CameraIntrinsics>,
}

#[derive(Debug, Serialize)]
struct WarpReport {
    mode: WarpMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parallel_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corollary_deviation: Option<f64>,
}

fn is_depth_translation(motion: &EgoMotion) -> bool {
    motion == &EgoMotion::depth_translation(motion.t[2])
}

fn required<T: Copy>(value: Option<T>, flag: &str, mode: WarpMode) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("--{flag} is required for --mode {mode:?}").to_lowercase()))
}

fn apply(mode: WarpMode, image: &Grid, config: &WarpConfig) -> CliResult<(Grid, WarpReport)> {
    let mut report = WarpReport {
        mode,
        scale_factor: None,
        parallel_bound: None,
        ratio: None,
        corollary_deviation: None,
    };
    let out = match mode {
        WarpMode::Logpolar => log_polar(image, &LogPolar::centered(image.hw().0, image.hw().1)?)?,
        WarpMode::Invlogpolar => inverse_log_polar(image, &LogPolar::centered(image.hw().0, image.hw().1)?)?,
        WarpMode::Projective | WarpMode::Scale => {
            let plane = required(config.plane, "plane", mode)?;
            let motion = required(config.motion, "motion", mode)?;
            let intrinsics = required(config.intrinsics, "intrinsics", mode)?;
            let bound = parallel_bound(&plane, &intrinsics);
            report.parallel_bound = Some(bound.bound);
            report.ratio = Some(bound.ratio);
            let tz = motion.t[2];
            if mode == WarpMode::Scale || is_depth_translation(&motion) {
                report.scale_factor = Some(scale_factor(&plane, tz)?);
                report.corollary_deviation = Some(corollary_deviation(&intrinsics, &plane, tz, 1)?);
            }
            if mode == WarpMode::Scale {
                let s = scale_factor(&plane, tz)?;
                scale_transform(image, s, intrinsics.principal_point(), BorderPolicy::WARP_DEFAULT)?
            } else {
                let map = projective_mapping(&intrinsics, &plane, &motion)?;
                warp(image, &map, BorderPolicy::WARP_DEFAULT)?
            }
        }
    };
    Ok((out, report))
}

fn report_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn run(global: &GlobalArgs, args: WarpArgs) -> CliResult<()> {
    let mut config: WarpConfig = load_config(global.config.as_deref())?;
    if let Some(v) = &args.image {
        config.image = Some(v.clone());
    }
    if let Some(v) = args.mode {
        config.mode = Some(v);
    }
    if let Some(v) = &args.plane {
        config.plane = Some(json_arg("plane", v)?);
    }
    if let Some(v) = &args.motion {
        config.motion = Some(json_arg("motion", v)?);
    }
    if let Some(v) = &args.intrinsics {
        config.intrinsics = Some(json_arg("intrinsics", v)?);
    }
    let image_path = config.image.clone().ok_or_else(|| CliError::usage("--image is required"))?;
    let mode = config.mode.ok_or_else(|| CliError::usage("--mode is required"))?;

    let (image, _) = read_pgm(&image_path)?;
    let (h, w) = image.hw();
    let intrinsics = match config.intrinsics {
        Some(c) => {
            c.validate()?;
            if (c.height, c.width) != (h, w) {
                return Err(CliError::usage(format!(
                    "intrinsics describe a {}x{} image but {} is {h}x{w}",
                    c.height,
                    c.width,
                    image_path.display()
                )));
            }
            c
        }
        None => CameraIntrinsics::centered(DEFAULT_FOCAL, w, h)?,
    };
    if matches!(mode, WarpMode::Projective | WarpMode::Scale) {
        config.intrinsics = Some(intrinsics);
    }

    let (out, report) = apply(mode, &image, &config)?;
    let dir = resolve_out_dir(global.out_dir.as_deref(), Some(&args.out));
    ensure_dir(&dir)?;
    echo_config(&dir, "warp", &config)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_pgm(&args.out, &out, 255)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::runtime(e.to_string()))?;
    text.push('\n');
    write_text(&report_path(&args.out), &text)?;
    println!("{mode:?} warp of {h}x{w} image written to {}", args.out.display());
    Ok(())
}
