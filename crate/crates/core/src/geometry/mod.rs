//! Camera geometry: the planar-patch projective warp under ego motion, its
//! reduction to a scale map for depth translation, the log-polar transform pair
//! and cross-dataset focal correction.

mod camera;
mod logpolar;
mod projective;

pub use camera::{focal_correction, CameraIntrinsics, DatasetFocalProfile, EgoMotion, PatchPlane, ROTATION_TOLERANCE};
pub use logpolar::{inverse_log_polar, log_polar, log_polar_roundtrip_ssim, LogPolar, DEFAULT_R_MIN};
pub use projective::{
    corollary_deviation, parallel_bound, projective_mapping, scale_factor, scale_mapping, ParallelBound, ProjectiveMap,
};
