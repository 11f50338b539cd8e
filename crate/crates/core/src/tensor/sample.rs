//! Bilinear resampling: point sampling, inverse-mapped warps, scale transforms and resizing.

use rayon::prelude::*;

use super::{BorderPolicy, Grid};
use crate::error::{Error, Result};

/// Closed-form map from an output pixel `(x, y)` (column, row) to real-valued
/// source coordinates. May leave the source domain; the border policy of the
/// sampler decides what is read there.
pub trait PixelMapping: Sync {
    fn source(&self, x: f64, y: f64) -> (f64, f64);
}

impl<F> PixelMapping for F
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        self(x, y)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl PixelMapping for IdentityMap {
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        (x, y)
    }
}

/// Output pixel `(x, y)` reads source `(x - dx, y - dy)`, i.e. content moves by `(dx, dy)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftMap {
    pub dx: f64,
    pub dy: f64,
}

impl PixelMapping for ShiftMap {
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        (x - self.dx, y - self.dy)
    }
}

/// The scale transform `T_s` about a center: output `(u, v)` reads
/// `((u - cx) / s + cx, (v - cy) / s + cy)`. `s > 1` magnifies.
#[derive(Debug, Clone, Copy)]
pub struct ScaleMap {
    pub s: f64,
    pub cx: f64,
    pub cy: f64,
}

impl PixelMapping for ScaleMap {
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.cx) / self.s + self.cx, (y - self.cy) / self.s + self.cy)
    }
}

/// `second` applied to the source coordinates produced by `first`: output
/// `(x, y)` reads `second(first(x, y))`.
#[derive(Debug, Clone, Copy)]
pub struct Composed<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: PixelMapping, B: PixelMapping> PixelMapping for Composed<A, B> {
    fn source(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = self.first.source(x, y);
        self.second.source(u, v)
    }
}

pub fn compose<A: PixelMapping, B: PixelMapping>(first: A, second: B) -> Composed<A, B> {
    Composed { first, second }
}

#[inline]
fn read(image: &Grid, w: usize, h: usize, x: isize, y: isize, border: BorderPolicy) -> f64 {
    match (border.resolve(x, w), border.resolve(y, h)) {
        (Some(sx), Some(sy)) => image.data()[sy * w + sx],
        _ => 0.0,
    }
}

#[inline]
fn bilinear_unchecked(image: &Grid, x: f64, y: f64, border: BorderPolicy) -> f64 {
    let (h, w) = image.hw();
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (xi, yi) = (x0 as isize, y0 as isize);
    let p00 = read(image, w, h, xi, yi, border);
    let p10 = read(image, w, h, xi + 1, yi, border);
    let p01 = read(image, w, h, xi, yi + 1, border);
    let p11 = read(image, w, h, xi + 1, yi + 1, border);
    let top = (1.0 - fx) * p00 + fx * p10;
    let bottom = (1.0 - fx) * p01 + fx * p11;
    (1.0 - fy) * top + fy * bottom
}

/// Bilinear interpolation of a rank-2 image at column `x`, row `y`.
pub fn bilinear_sample(image: &Grid, x: f64, y: f64, border: BorderPolicy) -> Result<f64> {
    if image.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context: "bilinear_sample",
            dim: "rank",
            expected: 2,
            actual: image.rank(),
        });
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::invalid("coordinate", format!("non-finite sample point ({x}, {y})")));
    }
    Ok(bilinear_unchecked(image, x, y, border))
}

/// Inverse-mapping resampler with the input's shape.
pub fn warp(image: &Grid, map: &dyn PixelMapping, border: BorderPolicy) -> Result<Grid> {
    let (h, w) = image.hw();
    warp_to(image, map, border, h, w)
}

/// Inverse-mapping resampler: `out(x, y) = bilinear(image, map(x, y))`, output `[out_h, out_w]`.
pub fn warp_to(
    image: &Grid,
    map: &dyn PixelMapping,
    border: BorderPolicy,
    out_h: usize,
    out_w: usize,
) -> Result<Grid> {
    if image.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context: "warp",
            dim: "rank",
            expected: 2,
            actual: image.rank(),
        });
    }
    let mut out = Grid::zeros(&[out_h, out_w]);
    out.data_mut()
        .par_chunks_mut(out_w)
        .enumerate()
        .try_for_each(|(y, row)| {
            for (x, v) in row.iter_mut().enumerate() {
                let (sx, sy) = map.source(x as f64, y as f64);
                *v = bilinear_sample(image, sx, sy, border)?;
            }
            Ok::<_, Error>(())
        })?;
    Ok(out)
}

/// `T_s` about `center = (cx, cy)`. `s = 1` returns the input unchanged, bit for bit.
pub fn scale_transform(image: &Grid, s: f64, center: (f64, f64), border: BorderPolicy) -> Result<Grid> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid("s", format!("scale factor must be finite and > 0, got {s}")));
    }
    if image.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context: "scale_transform",
            dim: "rank",
            expected: 2,
            actual: image.rank(),
        });
    }
    if s == 1.0 {
        return Ok(image.clone());
    }
    warp(image, &ScaleMap { s, cx: center.0, cy: center.1 }, border)
}

/// Geometric center of an `h x w` pixel grid, as `(cx, cy)`.
pub fn grid_center(h: usize, w: usize) -> (f64, f64) {
    ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0)
}

/// Bilinear resize with pixel-center alignment and clamped borders.
pub fn resize(image: &Grid, out_h: usize, out_w: usize) -> Result<Grid> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::invalid("size", "output extents must be >= 1"));
    }
    let (h, w) = image.hw();
    if (h, w) == (out_h, out_w) {
        return Ok(image.clone());
    }
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    let map = move |x: f64, y: f64| ((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    warp_to(image, &map, BorderPolicy::Clamp, out_h, out_w)
}
