//! Multi-scale Hermite-Gaussian steerable basis.
//!
//! Each member is
//! `psi_{sigma,n,m}(u, v) = A_{nm} / sigma^2 * H_n(u / sigma) H_m(v / sigma) exp(-(u^2 + v^2) / sigma^2)`
//! sampled at integer offsets about the center of an odd `k x k` grid, where
//! `H_n` is the probabilist's Hermite polynomial.
//!
//! The constant `A_{nm}` is fixed once per order so that the member at the
//! reference (largest) scale has unit l2 norm, and is shared by the other
//! scales. Sharing it keeps the `1 / sigma^2` factor that makes the basis
//! dilation-covariant, which scale equivariance of the synthesized kernels
//! depends on.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use crate::error::{Error, Result};
use crate::tensor::{io, Grid};

pub const MAX_HERMITE_ORDER: u32 = 10;
pub const DEFAULT_K: usize = 7;
pub const DEFAULT_MAX_ORDER: u32 = 6;
pub const DEFAULT_ALPHA: f64 = 0.1;
/// Width in pixels of the unit scale. Relative scales in a [`ScaleSet`] are
/// multiplied by this before sampling.
pub const DEFAULT_PIXEL_SCALE: f64 = 1.5;

/// Probabilist's Hermite polynomial via `H_{n+1} = x H_n - n H_{n-1}`.
pub fn hermite(n: u32, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::invalid(
            "n",
            format!("Hermite order {n} exceeds the supported maximum {MAX_HERMITE_ORDER}"),
        ));
    }
    Ok(hermite_unchecked(n, x))
}

fn hermite_unchecked(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for i in 1..n {
        let next = x * cur - f64::from(i) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Continuous basis function with `A = 1`.
pub fn hermite_gaussian(sigma: f64, n: u32, m: u32, u: f64, v: f64) -> f64 {
    let (a, b) = (u / sigma, v / sigma);
    hermite_unchecked(n, a) * hermite_unchecked(m, b) * (-(a * a + b * b)).exp() / (sigma * sigma)
}

fn check_filter_args(sigma: f64, n: u32, m: u32, k: usize) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
    }
    if k.is_multiple_of(2) {
        return Err(Error::invalid("k", format!("filter extent must be odd, got {k}")));
    }
    if n.max(m) > MAX_HERMITE_ORDER {
        return Err(Error::invalid(
            "order",
            format!("({n}, {m}) exceeds the supported maximum {MAX_HERMITE_ORDER}"),
        ));
    }
    Ok(())
}

/// Sample the `A = 1` closed form on the centered `k x k` integer grid (rows are `v`).
pub fn sample_filter(sigma: f64, n: u32, m: u32, k: usize) -> Result<Grid> {
    check_filter_args(sigma, n, m, k)?;
    let r = (k / 2) as f64;
    Ok(Grid::from_fn2(k, k, |row, col| {
        hermite_gaussian(sigma, n, m, col as f64 - r, row as f64 - r)
    }))
}

/// One basis member rescaled to unit l2 norm.
pub fn basis_filter(sigma: f64, n: u32, m: u32, k: usize) -> Result<Grid> {
    let raw = sample_filter(sigma, n, m, k)?;
    let norm = raw.l2_norm();
    if !(norm > 0.0) {
        return Err(Error::Degenerate(format!(
            "basis member (n={n}, m={m}) vanishes on the {k}x{k} grid at sigma={sigma}"
        )));
    }
    Ok(raw.scale(1.0 / norm))
}

/// Ascending relative filter scales; the largest is the reference scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    sigmas: Vec<f64>,
    alpha: Option<f64>,
}

impl ScaleSet {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::invalid("sigmas", "scale set is empty"));
        }
        if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::invalid("sigmas", format!("all scales must be finite and > 0: {sigmas:?}")));
        }
        if sigmas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sigmas", format!("scales must be strictly ascending: {sigmas:?}")));
        }
        Ok(Self { sigmas, alpha: None })
    }

    /// Downscaling factors `(1 + 2a, 1 + a, 1)` (truncated to `count`) as
    /// relative scales `1 / factor`, ascending.
    pub fn from_alpha(alpha: f64, count: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if !(1..=3).contains(&count) {
            return Err(Error::invalid("count", format!("scale count must be 1, 2 or 3, got {count}")));
        }
        let sigmas = (0..count)
            .rev()
            .map(|i| 1.0 / (1.0 + i as f64 * alpha))
            .collect();
        Ok(Self {
            sigmas,
            alpha: Some(alpha),
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Index of the reference (largest) scale.
    pub fn reference(&self) -> usize {
        self.sigmas.len() - 1
    }
}

/// Precomputed, immutable multi-scale basis: `filters` is `[S, B, k, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerableBasis {
    filters: Grid,
    scales: ScaleSet,
    orders: Vec<(u32, u32)>,
    k: usize,
    pixel_scale: f64,
}

pub fn build_basis(scales: &ScaleSet, max_order: u32, k: usize) -> Result<SteerableBasis> {
    build_basis_with(scales, max_order, k, DEFAULT_PIXEL_SCALE)
}

pub fn build_basis_with(scales: &ScaleSet, max_order: u32, k: usize, pixel_scale: f64) -> Result<SteerableBasis> {
    if k.is_multiple_of(2) || k == 0 {
        return Err(Error::invalid("k", format!("filter extent must be odd, got {k}")));
    }
    if max_order > MAX_HERMITE_ORDER {
        return Err(Error::invalid(
            "max_order",
            format!("{max_order} exceeds the supported maximum {MAX_HERMITE_ORDER}"),
        ));
    }
    let members = (max_order as usize + 1).pow(2);
    if members > k * k {
        return Err(Error::invalid(
            "max_order",
            format!("{members} basis members for max_order {max_order} exceed the {} pixels of a {k}x{k} filter", k * k),
        ));
    }
    if !(pixel_scale > 0.0) || !pixel_scale.is_finite() {
        return Err(Error::invalid("pixel_scale", format!("must be finite and > 0, got {pixel_scale}")));
    }

    let orders: Vec<(u32, u32)> = (0..=max_order)
        .flat_map(|n| (0..=max_order).map(move |m| (n, m)))
        .collect();
    let reference_sigma = scales.sigmas()[scales.reference()] * pixel_scale;
    let amplitudes = orders
        .iter()
        .map(|&(n, m)| {
            let norm = sample_filter(reference_sigma, n, m, k)?.l2_norm();
            if norm > 0.0 {
                Ok(1.0 / norm)
            } else {
                Err(Error::Degenerate(format!(
                    "basis member (n={n}, m={m}) vanishes on the {k}x{k} grid"
                )))
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut data = Vec::with_capacity(scales.len() * orders.len() * k * k);
    for &sigma in scales.sigmas() {
        for (&(n, m), &a) in orders.iter().zip(&amplitudes) {
            let f = sample_filter(sigma * pixel_scale, n, m, k)?;
            data.extend(f.data().iter().map(|v| a * v));
        }
    }
    let filters = Grid::new(&[scales.len(), orders.len(), k, k], data)?;
    Ok(SteerableBasis {
        filters,
        scales: scales.clone(),
        orders,
        k,
        pixel_scale,
    })
}

/// Largest deviation from unit l2 norm among the members at scale `reference`
/// of a `[S, B, k, k]` filter grid.
pub fn normalization_residual(filters: &Grid, reference: usize) -> f64 {
    let per_scale = filters.sub(reference);
    (0..per_scale.shape()[0])
        .map(|b| {
            let norm = per_scale.slice(b).iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

impl SteerableBasis {
    pub fn filters(&self) -> &Grid {
        &self.filters
    }

    pub fn scales(&self) -> &ScaleSet {
        &self.scales
    }

    pub fn orders(&self) -> &[(u32, u32)] {
        &self.orders
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pixel_scale(&self) -> f64 {
        self.pixel_scale
    }

    pub fn num_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn num_members(&self) -> usize {
        self.orders.len()
    }

    /// Member `b` at scale index `s` as a `[k, k]` grid.
    pub fn filter(&self, s: usize, b: usize) -> Grid {
        let k = self.k;
        let start = (s * self.num_members() + b) * k * k;
        Grid::new(&[k, k], self.filters.data()[start..start + k * k].to_vec()).expect("k x k filter")
    }

    /// Absolute width (pixels) used for scale index `s`.
    pub fn pixel_sigma(&self, s: usize) -> f64 {
        self.scales.sigmas()[s] * self.pixel_scale
    }

    pub fn normalization_residual(&self) -> f64 {
        normalization_residual(&self.filters, self.scales.reference())
    }

    /// Sidecar metadata recorded alongside exported filters.
    pub fn metadata(&self) -> Map<String, serde_json::Value> {
        let mut extra = Map::new();
        extra.insert("sigmas".into(), json!(self.scales.sigmas()));
        extra.insert("alpha".into(), json!(self.scales.alpha()));
        extra.insert("orders".into(), json!(self.orders));
        extra.insert("k".into(), json!(self.k));
        extra.insert("pixel_scale".into(), json!(self.pixel_scale));
        extra
    }

    /// Write the filters as a raw tensor with a JSON sidecar.
    pub fn export(&self, path: &Path) -> Result<()> {
        io::write_tensor_with(path, &self.filters, self.metadata())
    }
}
