//! Mean structural similarity with the usual 11x11 Gaussian window (std 1.5),
//! `K1 = 0.01`, `K2 = 0.03`, averaged over every window that fits inside the image.

use super::Grid;
use crate::error::{Error, Result};

pub const WINDOW: usize = 11;
pub const WINDOW_STD: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

/// Normalized 1D Gaussian taps of the SSIM window.
pub fn window_taps() -> [f64; WINDOW] {
    let mut taps = [0.0; WINDOW];
    let r = (WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - r;
        *t = (-d * d / (2.0 * WINDOW_STD * WINDOW_STD)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Dynamic range used when none is given: 1 for data in `[0, 1]`, 255 for data
/// in `[0, 255]`, otherwise the joint peak-to-peak span. Symmetric in `a`, `b`.
pub fn infer_range(a: &Grid, b: &Grid) -> f64 {
    let lo = a.min().min(b.min());
    let hi = a.max().max(b.max());
    if lo >= 0.0 && hi <= 1.0 {
        1.0
    } else if lo >= 0.0 && hi <= 255.0 {
        255.0
    } else if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

pub fn ssim(a: &Grid, b: &Grid) -> Result<f64> {
    ssim_with_range(a, b, infer_range(a, b))
}

pub fn ssim_with_range(a: &Grid, b: &Grid, range: f64) -> Result<f64> {
    let map = ssim_map(a, b, range)?;
    Ok(map.mean())
}

/// Per-window SSIM values, shape `[H - 10, W - 10]`.
pub fn ssim_map(a: &Grid, b: &Grid, range: f64) -> Result<Grid> {
    if a.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context: "ssim",
            dim: "rank",
            expected: 2,
            actual: a.rank(),
        });
    }
    a.require_same_shape(b, "ssim")?;
    let (h, w) = a.hw();
    if h < WINDOW || w < WINDOW {
        return Err(Error::invalid(
            "image",
            format!("ssim needs at least {WINDOW}x{WINDOW} pixels, got {h}x{w}"),
        ));
    }
    if !(range > 0.0) {
        return Err(Error::invalid("range", format!("dynamic range must be > 0, got {range}")));
    }
    let c1 = (K1 * range).powi(2);
    let c2 = (K2 * range).powi(2);
    let taps = window_taps();

    let aa = a.data().iter().map(|v| v * v).collect::<Vec<_>>();
    let bb = b.data().iter().map(|v| v * v).collect::<Vec<_>>();
    let ab = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect::<Vec<_>>();

    let mu_a = filter_valid(a.data(), h, w, &taps);
    let mu_b = filter_valid(b.data(), h, w, &taps);
    let e_aa = filter_valid(&aa, h, w, &taps);
    let e_bb = filter_valid(&bb, h, w, &taps);
    let e_ab = filter_valid(&ab, h, w, &taps);

    let (oh, ow) = (h - WINDOW + 1, w - WINDOW + 1);
    let data = (0..oh * ow)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .collect();
    Grid::new(&[oh, ow], data)
}

/// Separable "valid" correlation with `taps` along both axes.
fn filter_valid(src: &[f64], h: usize, w: usize, taps: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().zip(&line[x..x + WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}
