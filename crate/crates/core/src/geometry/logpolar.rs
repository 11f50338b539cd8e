use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{grid_center, resize, ssim, warp_to, BorderPolicy, Grid, PixelMapping};

pub const DEFAULT_R_MIN: f64 = 1.0;

/// Sampling geometry of a log-polar image.
///
/// Row `i` samples angle `2 pi i / rows`; column `j` samples
/// `ln r = ln r_min + j (ln r_max - ln r_min) / (cols - 1)`, where `r_max` is the
/// distance from the center to the farthest image corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPolar {
    pub center: (f64, f64),
    pub image_shape: (usize, usize),
    pub polar_shape: (usize, usize),
    pub r_min: f64,
    pub r_max: f64,
}

impl LogPolar {
    pub fn new(center: (f64, f64), image_shape: (usize, usize), polar_shape: (usize, usize), r_min: f64) -> Result<Self> {
        let (h, w) = image_shape;
        let (cx, cy) = center;
        if h == 0 || w == 0 {
            return Err(Error::invalid("image_shape", "extents must be >= 1"));
        }
        if !(0.0..=(w - 1) as f64).contains(&cx) || !(0.0..=(h - 1) as f64).contains(&cy) {
            return Err(Error::invalid("center", format!("({cx}, {cy}) lies outside the {h}x{w} image")));
        }
        if polar_shape.0 == 0 || polar_shape.1 < 2 {
            return Err(Error::invalid("polar_shape", "need >= 1 angle row and >= 2 radius columns"));
        }
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(Error::invalid("r_min", format!("must be finite and > 0, got {r_min}")));
        }
        let corners = [(0.0, 0.0), ((w - 1) as f64, 0.0), (0.0, (h - 1) as f64), ((w - 1) as f64, (h - 1) as f64)];
        let r_max = corners
            .iter()
            .map(|&(x, y)| (x - cx).hypot(y - cy))
            .fold(0.0, f64::max);
        if r_min >= r_max {
            return Err(Error::invalid("r_min", format!("r_min = {r_min} must be below r_max = {r_max}")));
        }
        Ok(Self {
            center,
            image_shape,
            polar_shape,
            r_min,
            r_max,
        })
    }

    /// Log-polar geometry about the image center with a polar image of the same shape.
    pub fn centered(h: usize, w: usize) -> Result<Self> {
        Self::new(grid_center(h, w), (h, w), (h, w), DEFAULT_R_MIN)
    }

    /// Width of one column in `ln r`.
    pub fn log_step(&self) -> f64 {
        (self.r_max.ln() - self.r_min.ln()) / (self.polar_shape.1 - 1) as f64
    }

    /// Width of one row in radians.
    pub fn angle_step(&self) -> f64 {
        TAU / self.polar_shape.0 as f64
    }
}

/// Forward sampling positions, with the per-row angles and per-column radii
/// tabulated once.
struct ForwardMap {
    center: (f64, f64),
    dirs: Vec<(f64, f64)>,
    radii: Vec<f64>,
}

impl ForwardMap {
    fn new(lp: &LogPolar) -> Self {
        let (rows, cols) = lp.polar_shape;
        let dirs = (0..rows)
            .map(|i| {
                let theta = i as f64 * lp.angle_step();
                (theta.cos(), theta.sin())
            })
            .collect();
        let radii = (0..cols).map(|j| (lp.r_min.ln() + j as f64 * lp.log_step()).exp()).collect();
        Self {
            center: lp.center,
            dirs,
            radii,
        }
    }
}

impl PixelMapping for ForwardMap {
    fn source(&self, col: f64, row: f64) -> (f64, f64) {
        let (c, s) = self.dirs[row as usize];
        let r = self.radii[col as usize];
        (self.center.0 + r * c, self.center.1 + r * s)
    }
}

struct InverseMap<'a>(&'a LogPolar);

impl PixelMapping for InverseMap<'_> {
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        let lp = self.0;
        let (dx, dy) = (x - lp.center.0, y - lp.center.1);
        let r = dx.hypot(dy).max(lp.r_min);
        let mut theta = dy.atan2(dx);
        if theta < 0.0 {
            theta += TAU;
        }
        ((r.ln() - lp.r_min.ln()) / lp.log_step(), theta / lp.angle_step())
    }
}

fn check_image(image: &Grid, context: &'static str, expect: (usize, usize)) -> Result<()> {
    if image.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context,
            dim: "rank",
            expected: 2,
            actual: image.rank(),
        });
    }
    let (h, w) = image.hw();
    if h != expect.0 {
        return Err(Error::ShapeMismatch {
            context,
            dim: "height",
            expected: expect.0,
            actual: h,
        });
    }
    if w != expect.1 {
        return Err(Error::ShapeMismatch {
            context,
            dim: "width",
            expected: expect.1,
            actual: w,
        });
    }
    Ok(())
}

/// Resample an image onto the `(angle, ln radius)` grid of `lp`. Samples
/// beyond the image edge read the clamped border.
pub fn log_polar(image: &Grid, lp: &LogPolar) -> Result<Grid> {
    check_image(image, "log_polar", lp.image_shape)?;
    warp_to(image, &ForwardMap::new(lp), BorderPolicy::Clamp, lp.polar_shape.0, lp.polar_shape.1)
}

/// Map a log-polar image back to Cartesian pixels. The angle axis wraps around;
/// radii below `r_min` read the first column.
pub fn inverse_log_polar(polar: &Grid, lp: &LogPolar) -> Result<Grid> {
    check_image(polar, "inverse_log_polar", lp.polar_shape)?;
    // Append a copy of row 0 so angles in the last row interval interpolate
    // towards the first row; clamping then handles everything else.
    let (rows, cols) = lp.polar_shape;
    let mut data = polar.data().to_vec();
    data.extend_from_slice(&polar.data()[..cols]);
    let wrapped = Grid::new(&[rows + 1, cols], data)?;
    warp_to(&wrapped, &InverseMap(lp), BorderPolicy::Clamp, lp.image_shape.0, lp.image_shape.1)
}

/// Upscale, log-polar, inverse log-polar, downscale, then SSIM against the original.
pub fn log_polar_roundtrip_ssim(image: &Grid, up_factor: f64) -> Result<f64> {
    if !(up_factor >= 1.0) || !up_factor.is_finite() {
        return Err(Error::invalid("up_factor", format!("must be finite and >= 1, got {up_factor}")));
    }
    let (h, w) = image.hw();
    let (uh, uw) = ((h as f64 * up_factor).round() as usize, (w as f64 * up_factor).round() as usize);
    let up = resize(image, uh, uw)?;
    let lp = LogPolar::centered(uh, uw)?;
    let back = inverse_log_polar(&log_polar(&up, &lp)?, &lp)?;
    let down = resize(&back, h, w)?;
    ssim(image, &down)
}
