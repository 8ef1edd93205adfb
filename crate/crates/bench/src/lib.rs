//! Shared inputs for the benchmarks.

use msiq_core::testset::standard_image;
use msiq_core::GrayImage;

/// Benchmark sizes (image height; width is 5/4 of it).
pub const SIZES: [usize; 3] = [64, 128, 256];

/// The textured standard image at the given height.
pub fn sample_image(height: usize) -> GrayImage {
    standard_image("texture", height).expect("texture is a standard image")
}
