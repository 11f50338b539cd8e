//! Straight-line reference implementations used as test oracles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seslab_core::tensor::{BorderPolicy, Grid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(rng: &mut ChaCha8Rng, shape: &[usize]) -> Grid {
    let n = shape.iter().product();
    Grid::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn fetch(plane: &[f64], h: usize, w: usize, y: i64, x: i64, border: BorderPolicy) -> f64 {
    let (hi, wi) = (h as i64, w as i64);
    match border {
        BorderPolicy::ZeroFill => {
            if y < 0 || x < 0 || y >= hi || x >= wi {
                0.0
            } else {
                plane[(y * wi + x) as usize]
            }
        }
        BorderPolicy::Clamp => plane[(y.clamp(0, hi - 1) * wi + x.clamp(0, wi - 1)) as usize],
        BorderPolicy::Circular => plane[(y.rem_euclid(hi) * wi + x.rem_euclid(wi)) as usize],
    }
}

/// Direct six-fold loop correlation.
pub fn conv_oracle(input: &Grid, kernels: &Grid, border: BorderPolicy) -> Grid {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (o, k) = (kernels.shape()[0], kernels.shape()[2]);
    let r = (k / 2) as i64;
    let mut out = Grid::zeros(&[o, h, w]);
    for oi in 0..o {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for ci in 0..c {
                    let plane = input.slice(ci);
                    for i in 0..k {
                        for j in 0..k {
                            let v = fetch(plane, h, w, y as i64 + i as i64 - r, x as i64 + j as i64 - r, border);
                            acc += v * kernels.get(&[oi, ci, i, j]);
                        }
                    }
                }
                out.set(&[oi, y, x], acc);
            }
        }
    }
    out
}

/// Bilinear read with clamped borders.
pub fn bilinear_oracle(img: &Grid, x: f64, y: f64) -> f64 {
    let (h, w) = img.hw();
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let at = |yy: f64, xx: f64| fetch(img.data(), h, w, yy as i64, xx as i64, BorderPolicy::Clamp);
    at(y0, x0) * (1.0 - fx) * (1.0 - fy)
        + at(y0, x0 + 1.0) * fx * (1.0 - fy)
        + at(y0 + 1.0, x0) * (1.0 - fx) * fy
        + at(y0 + 1.0, x0 + 1.0) * fx * fy
}

/// Scale a `[C, H, W]` map about its center, channel by channel.
pub fn scale_oracle(x: &Grid, s: f64) -> Grid {
    let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let mut out = Grid::zeros(&[c, h, w]);
    for ci in 0..c {
        let plane = Grid::new(&[h, w], x.slice(ci).to_vec()).unwrap();
        for yy in 0..h {
            for xx in 0..w {
                let v = bilinear_oracle(&plane, (xx as f64 - cx) / s + cx, (yy as f64 - cy) / s + cy);
                out.set(&[ci, yy, xx], v);
            }
        }
    }
    out
}

/// Two-pass mean and population variance.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (mean, values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// SSIM by explicit 11x11 window sums at every valid position.
pub fn ssim_oracle(a: &Grid, b: &Grid, range: f64) -> f64 {
    let (h, w) = a.hw();
    let g: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
    let total: f64 = g.iter().sum::<f64>().powi(2);
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let mut sum = 0.0;
    for y in 0..=h - 11 {
        for x in 0..=w - 11 {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let wt = g[i] * g[j] / total;
                    let (p, q) = (a.at(y + i, x + j), b.at(y + i, x + j));
                    ma += wt * p;
                    mb += wt * q;
                    saa += wt * p * p;
                    sbb += wt * q * q;
                    sab += wt * p * q;
                }
            }
            let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    sum / ((h - 10) * (w - 10)) as f64
}

/// Relative squared equivariance error of one pair of `[C, H, W]` maps on the
/// interior left after removing `floor(crop * extent)` pixels per side.
pub fn ratio_oracle(expected: &Grid, actual: &Grid, crop: f64) -> f64 {
    let (c, h, w) = (expected.shape()[0], expected.shape()[1], expected.shape()[2]);
    let (my, mx) = ((crop * h as f64).floor() as usize, (crop * w as f64).floor() as usize);
    let (mut num, mut den) = (0.0, 0.0);
    for ci in 0..c {
        for y in my..h - my {
            for x in mx..w - mx {
                let (e, a) = (expected.get(&[ci, y, x]), actual.get(&[ci, y, x]));
                num += (e - a).powi(2);
                den += e * e;
            }
        }
    }
    num / den
}
