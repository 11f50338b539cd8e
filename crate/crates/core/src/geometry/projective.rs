use serde::{Deserialize, Serialize};

use super::{CameraIntrinsics, EgoMotion, PatchPlane};
use crate::error::{Error, Result};
use crate::tensor::{PixelMapping, ScaleMap};

/// Denominators smaller than this fraction of `f` count as vanishing.
const DENOMINATOR_TOLERANCE: f64 = 1e-9;

/// The planar-patch map from pixels of the first view to source pixels in the
/// second view after the camera moves.
///
/// With centered coordinates `x = (u - u0, v - v0, f)` and
/// `M = R^T + (R^T t) (m, n, o) / p`, pixel `(u, v)` reads
/// `(u0 + f (M x)_1 / (M x)_3, v0 + f (M x)_2 / (M x)_3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveMap {
    m: [[f64; 3]; 3],
    f: f64,
    u0: f64,
    v0: f64,
}

impl ProjectiveMap {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Third homogeneous coordinate of `M x` at pixel `(u, v)`.
    pub fn denominator(&self, u: f64, v: f64) -> f64 {
        let x = [u - self.u0, v - self.v0, self.f];
        self.m[2][0] * x[0] + self.m[2][1] * x[1] + self.m[2][2] * x[2]
    }
}

impl PixelMapping for ProjectiveMap {
    fn source(&self, u: f64, v: f64) -> (f64, f64) {
        let x = [u - self.u0, v - self.v0, self.f];
        let row = |i: usize| self.m[i][0] * x[0] + self.m[i][1] * x[1] + self.m[i][2] * x[2];
        let d = row(2);
        (self.u0 + self.f * row(0) / d, self.v0 + self.f * row(1) / d)
    }
}

pub fn projective_mapping(
    intrinsics: &CameraIntrinsics,
    plane: &PatchPlane,
    motion: &EgoMotion,
) -> Result<ProjectiveMap> {
    intrinsics.validate()?;
    plane.validate()?;
    motion.validate()?;
    let tb = motion.rotated_translation();
    let normal = [plane.m, plane.n, plane.o];
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = motion.r[j][i] + tb[i] * normal[j] / plane.p;
        }
    }
    let map = ProjectiveMap {
        m,
        f: intrinsics.f,
        u0: intrinsics.u0,
        v0: intrinsics.v0,
    };
    check_denominator(&map, intrinsics, plane, motion)?;
    Ok(map)
}

fn check_denominator(map: &ProjectiveMap, c: &CameraIntrinsics, plane: &PatchPlane, motion: &EgoMotion) -> Result<()> {
    let tol = DENOMINATOR_TOLERANCE * c.f;
    // The denominator is affine in (u, v): over the pixel grid its extremes
    // are at the corners, so a sign change there means a zero in between.
    let (w, h) = ((c.width - 1) as f64, (c.height - 1) as f64);
    let corners = [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)];
    let values = corners.map(|(u, v)| map.denominator(u, v));
    let mixed = values.iter().any(|&d| d > 0.0) && values.iter().any(|&d| d < 0.0);
    if !mixed && values.iter().all(|d| d.abs() > tol) {
        return Ok(());
    }
    let mut worst = (0usize, 0usize, f64::INFINITY);
    for y in 0..c.height {
        for x in 0..c.width {
            let d = map.denominator(x as f64, y as f64).abs();
            if d < worst.2 {
                worst = (x, y, d);
            }
        }
    }
    Err(Error::Degenerate(format!(
        "projective denominator vanishes near pixel (u={}, v={}) (|D| = {:e}) for plane {:?}, motion {:?}",
        worst.0, worst.1, worst.2, plane, motion
    )))
}

/// Depth-translation scale `1 + t_z o / p`.
pub fn scale_factor(plane: &PatchPlane, tz: f64) -> Result<f64> {
    plane.validate()?;
    let s = 1.0 + tz * plane.o / plane.p;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate(format!(
            "scale factor {s} <= 0: the camera reaches or crosses the plane (t_z = {tz}, o = {}, p = {})",
            plane.o, plane.p
        )));
    }
    Ok(s)
}

/// The scale map about the principal point that approximates a depth translation.
pub fn scale_mapping(intrinsics: &CameraIntrinsics, plane: &PatchPlane, tz: f64) -> Result<ScaleMap> {
    let s = scale_factor(plane, tz)?;
    Ok(ScaleMap {
        s,
        cx: intrinsics.u0,
        cy: intrinsics.v0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelBound {
    /// `(|m| + |n|) W / (2 f)`.
    pub bound: f64,
    /// `bound / o`; a plane is approximately parallel to the image plane when this is small.
    pub ratio: f64,
}

pub fn parallel_bound(plane: &PatchPlane, intrinsics: &CameraIntrinsics) -> ParallelBound {
    let bound = (plane.m.abs() + plane.n.abs()) * intrinsics.width as f64 / (2.0 * intrinsics.f);
    ParallelBound {
        bound,
        ratio: bound / plane.o,
    }
}

/// Largest pixel displacement between the exact depth-translation map and its
/// scale approximation, over pixels sampled every `stride` (the last row and
/// column are always included).
pub fn corollary_deviation(intrinsics: &CameraIntrinsics, plane: &PatchPlane, tz: f64, stride: usize) -> Result<f64> {
    if stride == 0 {
        return Err(Error::invalid("stride", "must be >= 1"));
    }
    let scale = scale_mapping(intrinsics, plane, tz)?;
    let exact = projective_mapping(intrinsics, plane, &EgoMotion::depth_translation(tz))?;
    let axis = |n: usize| {
        let mut v: Vec<usize> = (0..n).step_by(stride).collect();
        if v.last() != Some(&(n - 1)) {
            v.push(n - 1);
        }
        v
    };
    let (xs, ys) = (axis(intrinsics.width), axis(intrinsics.height));
    let mut worst: f64 = 0.0;
    for &y in &ys {
        for &x in &xs {
            let (a, b) = exact.source(x as f64, y as f64);
            let (c, d) = scale.source(x as f64, y as f64);
            worst = worst.max((a - c).hypot(b - d));
        }
    }
    Ok(worst)
}
