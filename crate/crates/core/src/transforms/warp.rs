//! Inverse-mapped geometric warps centered on the image center.
//!
//! Coordinates are `(row, col)` in pixel-index units; the center is
//! `((H - 1) / 2, (W - 1) / 2)`. Samples are taken with bicubic interpolation
//! and source pixels outside the image contribute zero.

use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::{cubic_weights, jpeg_quality_for, jpeg_round_trip};
use crate::error::{MsiqError, Result};
use crate::image::GrayImage;

/// Degradation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradationKind {
    /// Area-preserving anisotropic scaling: rows by `1 + lambda`, columns by `1 / (1 + lambda)`.
    #[serde(rename = "anisotropic", alias = "anisotropic_affine")]
    AnisotropicAffine,
    /// Column shift proportional to the centered row coordinate.
    Shear,
    Rotation,
    /// Projective map pulling the two top corners horizontally inward.
    Perspective,
    /// JPEG round trip; the non-geometric control.
    Jpeg,
}

impl DegradationKind {
    pub const ALL: [DegradationKind; 5] = [
        DegradationKind::AnisotropicAffine,
        DegradationKind::Shear,
        DegradationKind::Rotation,
        DegradationKind::Perspective,
        DegradationKind::Jpeg,
    ];

    pub const GEOMETRIC: [DegradationKind; 4] = [
        DegradationKind::AnisotropicAffine,
        DegradationKind::Shear,
        DegradationKind::Rotation,
        DegradationKind::Perspective,
    ];

    pub fn is_geometric(self) -> bool {
        self != DegradationKind::Jpeg
    }

    pub fn name(self) -> &'static str {
        match self {
            DegradationKind::AnisotropicAffine => "anisotropic",
            DegradationKind::Shear => "shear",
            DegradationKind::Rotation => "rotation",
            DegradationKind::Perspective => "perspective",
            DegradationKind::Jpeg => "jpeg",
        }
    }
}

impl fmt::Display for DegradationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DegradationKind {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anisotropic_affine" => return Ok(DegradationKind::AnisotropicAffine),
            _ => {}
        }
        DegradationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                MsiqError::param(format!(
                    "unknown degradation '{s}' (expected anisotropic, shear, rotation, perspective or jpeg)"
                ))
            })
    }
}

/// A degradation family and its strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub kind: DegradationKind,
    pub lambda: f64,
}

impl DegradationSpec {
    pub fn new(kind: DegradationKind, lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(MsiqError::param(format!("lambda must be in [0, 1), got {lambda}")));
        }
        Ok(DegradationSpec { kind, lambda })
    }
}

/// Tunable parts of the degradation families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeConfig {
    /// Rotation angle in radians per unit of lambda.
    pub rotation_radians_per_lambda: f64,
    /// Intensity used for samples that fall outside the source image.
    pub border_fill: f64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        DegradeConfig {
            rotation_radians_per_lambda: 1.0,
            border_fill: 0.0,
        }
    }
}

/// 3x3 projective map in `(row, col, 1)` homogeneous coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        (
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        )
    }

    /// Solves for the map sending each `from[i]` to `to[i]`.
    pub fn from_points(from: [(f64, f64); 4], to: [(f64, f64); 4]) -> Result<Self> {
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for (i, (&(x, y), &(u, v))) in from.iter().zip(&to).enumerate() {
            let r = 2 * i;
            a[(r, 0)] = x;
            a[(r, 1)] = y;
            a[(r, 2)] = 1.0;
            a[(r, 6)] = -u * x;
            a[(r, 7)] = -u * y;
            b[r] = u;
            a[(r + 1, 3)] = x;
            a[(r + 1, 4)] = y;
            a[(r + 1, 5)] = 1.0;
            a[(r + 1, 6)] = -v * x;
            a[(r + 1, 7)] = -v * y;
            b[r + 1] = v;
        }
        let h = a
            .lu()
            .solve(&b)
            .ok_or_else(|| MsiqError::param("degenerate corner configuration"))?;
        Ok(Homography([
            [h[0], h[1], h[2]],
            [h[3], h[4], h[5]],
            [h[6], h[7], 1.0],
        ]))
    }
}

/// Corner map for the perspective family: top corners move inward by `lambda * W / 2`.
///
/// Returns the output-to-source (inverse) homography.
pub fn perspective_homography(height: usize, width: usize, lambda: f64) -> Result<Homography> {
    let (b, r) = ((height - 1) as f64, (width - 1) as f64);
    let shift = lambda * width as f64 / 2.0;
    let src = [(0.0, 0.0), (0.0, r), (b, 0.0), (b, r)];
    let dst = [(0.0, shift), (0.0, r - shift), (b, 0.0), (b, r)];
    Homography::from_points(dst, src)
}

/// Bicubic sample at fractional `(row, col)`; out-of-image taps read `fill`.
fn sample_bicubic(img: &GrayImage, x: f64, y: f64, fill: f64) -> f64 {
    let (h, w) = (img.height() as isize, img.width() as isize);
    let (x0, y0) = (x.floor(), y.floor());
    let (xi, yi) = (x0 as isize, y0 as isize);
    if xi < -2 || yi < -2 || xi > h + 1 || yi > w + 1 {
        return fill;
    }
    let wx = cubic_weights(x - x0);
    let wy = cubic_weights(y - y0);
    let mut acc = 0.0;
    for (a, &wa) in wx.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let r = xi - 1 + a as isize;
        let mut row_acc = 0.0;
        for (b, &wb) in wy.iter().enumerate() {
            if wb == 0.0 {
                continue;
            }
            let c = yi - 1 + b as isize;
            let v = if r >= 0 && r < h && c >= 0 && c < w {
                img.get(r as usize, c as usize)
            } else {
                fill
            };
            row_acc += wb * v;
        }
        acc += wa * row_acc;
    }
    acc
}

/// Builds an output image of the same size where pixel `(r, c)` samples the
/// source at `map(r, c)`.
pub fn warp_inverse(img: &GrayImage, fill: f64, map: impl Fn(f64, f64) -> (f64, f64)) -> GrayImage {
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let (sx, sy) = map(r as f64, c as f64);
            out.push(if sx.is_finite() && sy.is_finite() {
                sample_bicubic(img, sx, sy, fill)
            } else {
                fill
            });
        }
    }
    GrayImage::from_raw_clamped(h, w, out)
}

pub fn degrade(img: &GrayImage, spec: DegradationSpec) -> Result<GrayImage> {
    degrade_with(img, spec, &DegradeConfig::default())
}

/// Applies the degradation `spec`; output has the input's dimensions.
pub fn degrade_with(img: &GrayImage, spec: DegradationSpec, cfg: &DegradeConfig) -> Result<GrayImage> {
    let DegradationSpec { kind, lambda } = DegradationSpec::new(spec.kind, spec.lambda)?;
    let (h, w) = img.dims();
    let (cx, cy) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let fill = cfg.border_fill;
    let out = match kind {
        DegradationKind::AnisotropicAffine => {
            let s = 1.0 + lambda;
            warp_inverse(img, fill, |x, y| (cx + (x - cx) / s, cy + (y - cy) * s))
        }
        DegradationKind::Shear => warp_inverse(img, fill, |x, y| (x, y - lambda * (x - cx))),
        DegradationKind::Rotation => {
            let theta = lambda * cfg.rotation_radians_per_lambda;
            let (sin, cos) = theta.sin_cos();
            // inverse of a rotation by theta is a rotation by -theta
            warp_inverse(img, fill, |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + cos * dx + sin * dy, cy - sin * dx + cos * dy)
            })
        }
        DegradationKind::Perspective => {
            if h < 2 || w < 2 {
                return Ok(img.clone());
            }
            let hm = perspective_homography(h, w, lambda)?;
            warp_inverse(img, fill, |x, y| hm.apply(x, y))
        }
        DegradationKind::Jpeg => jpeg_round_trip(img, jpeg_quality_for(lambda))?,
    };
    Ok(out)
}
