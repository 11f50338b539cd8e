use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole intrinsics: focal length and principal point in pixels, image extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub f: f64,
    pub u0: f64,
    pub v0: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(f: f64, u0: f64, v0: f64, width: usize, height: usize) -> Result<Self> {
        let c = Self {
            f,
            u0,
            v0,
            width,
            height,
        };
        c.validate()?;
        Ok(c)
    }

    /// Principal point at the geometric center of the pixel grid.
    pub fn centered(f: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(f, (width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::invalid("f", format!("focal length must be finite and > 0, got {}", self.f)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("intrinsics", "image extents must be >= 1"));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        if !(0.0..=w).contains(&self.u0) || !(0.0..=h).contains(&self.v0) {
            return Err(Error::invalid(
                "principal point",
                format!("({}, {}) lies outside the {}x{} image", self.u0, self.v0, self.width, self.height),
            ));
        }
        Ok(())
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.u0, self.v0)
    }
}

/// The plane `m x + n y + o z + p = 0` in camera coordinates, in front of the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchPlane {
    pub m: f64,
    pub n: f64,
    pub o: f64,
    pub p: f64,
}

impl PatchPlane {
    pub fn new(m: f64, n: f64, o: f64, p: f64) -> Result<Self> {
        let plane = Self { m, n, o, p };
        plane.validate()?;
        Ok(plane)
    }

    /// The fronto-parallel plane `z = depth`.
    pub fn fronto_parallel(depth: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 1.0, -depth)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.m, self.n, self.o, self.p].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("plane", "coefficients must be finite"));
        }
        if !(self.o > 0.0) || !(self.p < 0.0) {
            return Err(Error::invalid(
                "plane",
                format!("expected o > 0 and p < 0 (plane in front of the camera), got o = {}, p = {}", self.o, self.p),
            ));
        }
        Ok(())
    }
}

/// Rigid camera motion: rotation `r` (row-major) and translation `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoMotion {
    #[serde(default = "identity3")]
    pub r: [[f64; 3]; 3],
    #[serde(default)]
    pub t: [f64; 3],
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub const ROTATION_TOLERANCE: f64 = 1e-9;

impl EgoMotion {
    pub fn new(r: [[f64; 3]; 3], t: [f64; 3]) -> Result<Self> {
        let m = Self { r, t };
        m.validate()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        Self {
            r: identity3(),
            t: [0.0; 3],
        }
    }

    /// Pure translation along the optical axis.
    pub fn depth_translation(tz: f64) -> Self {
        Self {
            r: identity3(),
            t: [0.0, 0.0, tz],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.iter().flatten().chain(&self.t).all(|v| v.is_finite()) {
            return Err(Error::invalid("motion", "rotation and translation must be finite"));
        }
        let r = &self.r;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        if worst > ROTATION_TOLERANCE {
            return Err(Error::invalid("rotation", format!("R^T R deviates from I by {worst:e}")));
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::invalid("rotation", format!("det R = {det}, expected 1")));
        }
        Ok(())
    }

    /// `R^T t`.
    pub fn rotated_translation(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| self.r[k][i] * self.t[k]).sum();
        }
        out
    }
}

/// Camera profile used for cross-dataset depth correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFocalProfile {
    /// Vertical focal length in pixels.
    pub f_y: f64,
    /// Image height in pixels.
    pub height: f64,
}

impl DatasetFocalProfile {
    pub fn new(f_y: f64, height: f64) -> Result<Self> {
        if !(f_y > 0.0 && height > 0.0) || !f_y.is_finite() || !height.is_finite() {
            return Err(Error::invalid(
                "focal profile",
                format!("f_y and height must be finite and > 0, got {f_y}, {height}"),
            ));
        }
        Ok(Self { f_y, height })
    }

    /// A profile with the given normalized focal length.
    pub fn from_normalized(f_bar: f64) -> Result<Self> {
        Self::new(f_bar, 2.0)
    }

    /// `2 f_y / H`.
    pub fn normalized_focal(&self) -> f64 {
        2.0 * self.f_y / self.height
    }
}

/// Multiplicative depth correction for a model trained on `src` cameras and
/// evaluated on `dst` images: `src.f_bar / dst.f_bar`.
pub fn focal_correction(src: &DatasetFocalProfile, dst: &DatasetFocalProfile) -> f64 {
    src.normalized_focal() / dst.normalized_focal()
}
