//! Deterministic synthetic test images.
//!
//! Blob and noise scenes are defined in resolution-independent coordinates, so a
//! given seed renders the same scene at any size (blob widths scale with height).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

pub const MIN_EXTENT: usize = 8;

/// Reference height at which blob widths are drawn from `BLOB_STD_PX`.
const BLOB_REFERENCE_HEIGHT: f64 = 96.0;
const BLOB_STD_PX: (f64, f64) = (3.0, 8.0);
const BLOB_MIN_STD: f64 = 2.0;
/// Blob centers stay this far (as a fraction of the extent) from the border.
const BLOB_MARGIN: f64 = 0.2;

const NOISE_MODES: usize = 32;
/// Highest spatial frequency of the noise, in cycles per image height.
const NOISE_MAX_CYCLES: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    GaussianBlobs,
    Checkerboard,
    BandlimitedNoise,
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::GaussianBlobs => "gaussian-blobs",
            SynthKind::Checkerboard => "checkerboard",
            SynthKind::BandlimitedNoise => "bandlimited-noise",
        })
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-blobs" => Ok(SynthKind::GaussianBlobs),
            "checkerboard" => Ok(SynthKind::Checkerboard),
            "bandlimited-noise" => Ok(SynthKind::BandlimitedNoise),
            other => Err(Error::invalid("kind", format!("unknown synthetic image kind `{other}`"))),
        }
    }
}

/// Render one synthetic image. Checkerboards use a cell of `max(1, H / 8)` pixels;
/// see [`checkerboard`] for an explicit cell size.
pub fn synth_image(kind: SynthKind, height: usize, width: usize, seed: u64) -> Result<Grid> {
    if height < MIN_EXTENT || width < MIN_EXTENT {
        return Err(Error::invalid(
            "size",
            format!("synthetic images need H, W >= {MIN_EXTENT}, got {height}x{width}"),
        ));
    }
    Ok(match kind {
        SynthKind::GaussianBlobs => gaussian_blobs(height, width, seed),
        SynthKind::Checkerboard => checkerboard(height, width, (height / 8).max(1), seed),
        SynthKind::BandlimitedNoise => bandlimited_noise(height, width, seed),
    })
}

/// Per-image seed for item `index` of a corpus drawn from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined key
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn synth_corpus(kind: SynthKind, count: usize, height: usize, width: usize, master_seed: u64) -> Result<Vec<Grid>> {
    (0..count as u64)
        .map(|i| synth_image(kind, height, width, derive_seed(master_seed, i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    /// Center in units of image width / height, in `[0, 1]`.
    pub fx: f64,
    pub fy: f64,
    /// Standard deviation at the reference height of 96 pixels.
    pub std_ref: f64,
    pub amplitude: f64,
}

impl Blob {
    pub fn center_px(&self, height: usize, width: usize) -> (f64, f64) {
        (self.fx * width as f64 - 0.5, self.fy * height as f64 - 0.5)
    }

    pub fn std_px(&self, height: usize) -> f64 {
        (self.std_ref * height as f64 / BLOB_REFERENCE_HEIGHT).max(BLOB_MIN_STD)
    }
}

/// The blob list a seed expands to (3 to 8 blobs).
pub fn blob_scene(seed: u64) -> Vec<Blob> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(3..=8);
    (0..count)
        .map(|_| Blob {
            fx: rng.gen_range(BLOB_MARGIN..1.0 - BLOB_MARGIN),
            fy: rng.gen_range(BLOB_MARGIN..1.0 - BLOB_MARGIN),
            std_ref: rng.gen_range(BLOB_STD_PX.0..BLOB_STD_PX.1),
            amplitude: rng.gen_range(0.3..1.0),
        })
        .collect()
}

/// Sample the continuous blob scene, optionally transformed by `T_s` about `center`.
///
/// With `scale = Some((s, (cx, cy)))` each blob center moves to `c + s (b - c)` and its
/// width to `s * std`, which is the exact continuous-image counterpart of
/// [`scale_transform`](super::scale_transform).
pub fn render_blobs(blobs: &[Blob], height: usize, width: usize, scale: Option<(f64, (f64, f64))>) -> Grid {
    let placed: Vec<(f64, f64, f64, f64)> = blobs
        .iter()
        .map(|b| {
            let (bx, by) = b.center_px(height, width);
            let sd = b.std_px(height);
            match scale {
                None => (bx, by, sd, b.amplitude),
                Some((s, (cx, cy))) => (cx + s * (bx - cx), cy + s * (by - cy), s * sd, b.amplitude),
            }
        })
        .collect();
    Grid::from_fn2(height, width, |y, x| {
        placed
            .iter()
            .map(|&(bx, by, sd, a)| {
                let (dx, dy) = (x as f64 - bx, y as f64 - by);
                a * (-(dx * dx + dy * dy) / (2.0 * sd * sd)).exp()
            })
            .sum()
    })
}

fn gaussian_blobs(height: usize, width: usize, seed: u64) -> Grid {
    render_blobs(&blob_scene(seed), height, width, None)
}

/// Binary checkerboard with square cells of `cell` pixels; the seed's parity picks the phase.
pub fn checkerboard(height: usize, width: usize, cell: usize, seed: u64) -> Grid {
    let cell = cell.max(1);
    let phase = (seed % 2) as usize;
    Grid::from_fn2(height, width, |y, x| ((y / cell + x / cell + phase) % 2) as f64)
}

/// Sum of random plane waves up to 40 cycles per image height, rescaled to `[0, 1]`.
fn bandlimited_noise(height: usize, width: usize, seed: u64) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (0..NOISE_MODES)
        .map(|_| {
            let freq = rng.gen_range(1.0..NOISE_MAX_CYCLES);
            let dir = rng.gen_range(0.0..PI);
            let phase = rng.gen_range(0.0..2.0 * PI);
            (2.0 * PI * freq * dir.cos(), 2.0 * PI * freq * dir.sin(), phase)
        })
        .collect();
    let h = height as f64;
    let raw = Grid::from_fn2(height, width, |y, x| {
        let (u, v) = ((x as f64 + 0.5) / h, (y as f64 + 0.5) / h);
        modes.iter().map(|&(kx, ky, ph)| (kx * u + ky * v + ph).cos()).sum()
    });
    let (lo, hi) = (raw.min(), raw.max());
    if hi > lo {
        raw.map(|v| (v - lo) / (hi - lo))
    } else {
        raw.map(|_| 0.5)
    }
}
