//! Resampling and the parameterized degradation families.

mod jpeg;
mod resize;
mod warp;

pub use jpeg::{jpeg_quality_for, jpeg_round_trip};
pub use resize::{resize, resize_to, ResizeMethod};
pub use warp::{
    degrade, degrade_with, perspective_homography, warp_inverse, DegradationKind, DegradationSpec,
    DegradeConfig, Homography,
};

/// Keys cubic convolution kernel with `a = -0.75`.
#[inline]
pub(crate) fn cubic_kernel(x: f64) -> f64 {
    const A: f64 = -0.75;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Bicubic tap weights for fractional offset `t` in `[0, 1)`, taps at `-1, 0, 1, 2`.
#[inline]
pub(crate) fn cubic_weights(t: f64) -> [f64; 4] {
    [
        cubic_kernel(t + 1.0),
        cubic_kernel(t),
        cubic_kernel(1.0 - t),
        cubic_kernel(2.0 - t),
    ]
}
