//! Stride-1, "same"-size 2D correlation.

use rayon::prelude::*;

use super::{BorderPolicy, Grid};
use crate::error::{Error, Result};

/// Multi-channel 2D correlation (no kernel flip), stride 1, output the same
/// spatial size as the input.
///
/// `input` is `[C, H, W]`, `kernels` is `[O, C, k, k]` with odd `k`; the result
/// is `[O, H, W]` with
/// `out[o](y, x) = sum_c sum_{i,j} input[c](y + i - k/2, x + j - k/2) * kernels[o, c, i, j]`.
pub fn conv2d(input: &Grid, kernels: &Grid, border: BorderPolicy) -> Result<Grid> {
    if input.rank() != 3 {
        return Err(Error::ShapeMismatch {
            context: "conv2d input",
            dim: "rank",
            expected: 3,
            actual: input.rank(),
        });
    }
    if kernels.rank() != 4 {
        return Err(Error::ShapeMismatch {
            context: "conv2d kernels",
            dim: "rank",
            expected: 4,
            actual: kernels.rank(),
        });
    }
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (c_out, kc, kh, kw) = (
        kernels.shape()[0],
        kernels.shape()[1],
        kernels.shape()[2],
        kernels.shape()[3],
    );
    if kc != c_in {
        return Err(Error::ShapeMismatch {
            context: "conv2d",
            dim: "input channels",
            expected: kc,
            actual: c_in,
        });
    }
    if kh != kw {
        return Err(Error::ShapeMismatch {
            context: "conv2d kernels",
            dim: "kernel width",
            expected: kh,
            actual: kw,
        });
    }
    if kh % 2 == 0 {
        return Err(Error::invalid("kernels", format!("kernel extent must be odd, got {kh}")));
    }

    let mut out = Grid::zeros(&[c_out, h, w]);
    let plane = h * w;
    let k = kh;
    out.data_mut()
        .par_chunks_mut(plane)
        .enumerate()
        .for_each(|(o, dst)| {
            for c in 0..c_in {
                let src = input.slice(c);
                let taps = &kernels.data()[(o * c_in + c) * k * k..(o * c_in + c + 1) * k * k];
                accumulate_plane(dst, src, h, w, taps, k, border);
            }
        });
    Ok(out)
}

/// `dst += correlate(src, taps)` for one channel pair.
fn accumulate_plane(
    dst: &mut [f64],
    src: &[f64],
    h: usize,
    w: usize,
    taps: &[f64],
    k: usize,
    border: BorderPolicy,
) {
    let r = (k / 2) as isize;
    for y in 0..h {
        let out_row = &mut dst[y * w..(y + 1) * w];
        for i in 0..k {
            let dy = i as isize - r;
            let Some(sy) = border.resolve(y as isize + dy, h) else {
                continue;
            };
            let in_row = &src[sy * w..(sy + 1) * w];
            for j in 0..k {
                let wt = taps[i * k + j];
                let dx = j as isize - r;
                // Interior columns: x + dx stays inside 0..w.
                let lo = (-dx).max(0) as usize;
                let hi = (w as isize - dx).clamp(0, w as isize) as usize;
                if lo < hi {
                    let shifted = &in_row[(lo as isize + dx) as usize..(hi as isize + dx) as usize];
                    for (o, &v) in out_row[lo..hi].iter_mut().zip(shifted) {
                        *o += wt * v;
                    }
                }
                for x in (0..lo.min(w)).chain(hi.max(lo)..w) {
                    if let Some(sx) = border.resolve(x as isize + dx, w) {
                        out_row[x] += wt * in_row[sx];
                    }
                }
            }
        }
    }
}
