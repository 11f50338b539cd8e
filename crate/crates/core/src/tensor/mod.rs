//! Dense grids and the image-processing substrate: correlation, bilinear
//! resampling, SSIM, synthetic images and file I/O.

mod border;
mod conv;
mod grid;
pub mod io;
mod sample;
mod ssim;
pub mod synth;

pub use border::BorderPolicy;
pub use conv::conv2d;
pub use grid::{Grid, MAX_RANK, MIN_RANK};
pub use io::{io_read, io_write, read_pgm, read_tensor, write_pgm, write_tensor};
pub use sample::{
    bilinear_sample, compose, grid_center, resize, scale_transform, warp, warp_to, Composed, IdentityMap,
    PixelMapping, ScaleMap, ShiftMap,
};
pub use ssim::{infer_range, ssim, ssim_map, ssim_with_range};
pub use synth::{synth_corpus, synth_image, SynthKind};
