use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cubic_kernel;
use crate::error::{MsiqError, Result};
use crate::image::GrayImage;

/// Interpolation method for [`resize`] and [`resize_to`].
///
/// Sampling is center-aligned: output pixel `o` maps to source coordinate
/// `(o + 1/2) * r - 1/2`, where `r` is `1 / scale` for [`resize`] and
/// `in / out` for [`resize_to`]. Borders replicate the edge pixel. No
/// anti-alias prefilter is applied except by `Area`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMethod {
    Nearest,
    Bilinear,
    Bicubic,
    Lanczos4,
    /// Box filter: each output pixel averages the source pixels its footprint covers.
    Area,
}

impl ResizeMethod {
    pub const ALL: [ResizeMethod; 5] = [
        ResizeMethod::Area,
        ResizeMethod::Bilinear,
        ResizeMethod::Lanczos4,
        ResizeMethod::Bicubic,
        ResizeMethod::Nearest,
    ];

    /// Methods usable to return a scaled copy to its original grid.
    pub const RETURN_METHODS: [ResizeMethod; 4] = [
        ResizeMethod::Nearest,
        ResizeMethod::Bilinear,
        ResizeMethod::Bicubic,
        ResizeMethod::Lanczos4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResizeMethod::Nearest => "nearest",
            ResizeMethod::Bilinear => "bilinear",
            ResizeMethod::Bicubic => "bicubic",
            ResizeMethod::Lanczos4 => "lanczos4",
            ResizeMethod::Area => "area",
        }
    }
}

impl fmt::Display for ResizeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResizeMethod {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        ResizeMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                MsiqError::param(format!(
                    "unknown interpolation '{s}' (expected nearest, bilinear, bicubic, lanczos4 or area)"
                ))
            })
    }
}

fn lanczos4(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-12 {
        1.0
    } else if x < 4.0 {
        let px = PI * x;
        4.0 * px.sin() * (px / 4.0).sin() / (px * px)
    } else {
        0.0
    }
}

/// Sparse resampling matrix for one axis.
struct AxisWeights {
    taps: Vec<Vec<(usize, f64)>>,
}

impl AxisWeights {
    /// `ratio` is the source distance covered by one output pixel.
    fn new(input: usize, output: usize, ratio: f64, method: ResizeMethod) -> Self {
        if input == output && ratio == 1.0 {
            return AxisWeights {
                taps: (0..output).map(|i| vec![(i, 1.0)]).collect(),
            };
        }
        let last = input as isize - 1;
        let clamp = |k: isize| k.clamp(0, last) as usize;
        let taps = (0..output)
            .map(|o| match method {
                ResizeMethod::Nearest => {
                    let k = (((o as f64 + 0.5) * ratio).floor() as isize).min(last);
                    vec![(clamp(k), 1.0)]
                }
                ResizeMethod::Area => {
                    let lo = (o as f64 * ratio).min(input as f64 - 1.0);
                    let hi = ((o as f64 + 1.0) * ratio).max(lo + 1e-9);
                    let mut taps = Vec::new();
                    let mut k = lo.floor() as usize;
                    while (k as f64) < hi && k < input {
                        let overlap = hi.min(k as f64 + 1.0) - lo.max(k as f64);
                        if overlap > 0.0 {
                            taps.push((k, overlap / ratio));
                        }
                        k += 1;
                    }
                    normalize(taps)
                }
                _ => {
                    let (support, kernel): (isize, fn(f64) -> f64) = match method {
                        ResizeMethod::Bilinear => (1, |d: f64| (1.0 - d.abs()).max(0.0)),
                        ResizeMethod::Bicubic => (2, cubic_kernel),
                        _ => (4, lanczos4),
                    };
                    let x = (o as f64 + 0.5) * ratio - 0.5;
                    let base = x.floor() as isize;
                    let mut taps: Vec<(usize, f64)> = Vec::with_capacity(2 * support as usize);
                    for k in (base - support + 1)..=(base + support) {
                        let w = kernel(x - k as f64);
                        if w == 0.0 {
                            continue;
                        }
                        let idx = clamp(k);
                        match taps.iter_mut().find(|(i, _)| *i == idx) {
                            Some(t) => t.1 += w,
                            None => taps.push((idx, w)),
                        }
                    }
                    normalize(taps)
                }
            })
            .collect();
        AxisWeights { taps }
    }
}

fn normalize(mut taps: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let total: f64 = taps.iter().map(|t| t.1).sum();
    if total != 0.0 && total != 1.0 {
        taps.iter_mut().for_each(|t| t.1 /= total);
    }
    taps
}

/// Resizes by a uniform factor; output size is `round(H * scale) x round(W * scale)`.
///
/// The content is scaled by exactly `scale` on both axes, so when `H * scale`
/// is not an integer the last row or column is partly filled from the border.
pub fn resize(img: &GrayImage, scale: f64, method: ResizeMethod) -> Result<GrayImage> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(MsiqError::param(format!("scale must be positive, got {scale}")));
    }
    let oh = (img.height() as f64 * scale).round() as usize;
    let ow = (img.width() as f64 * scale).round() as usize;
    check_dims(oh, ow)?;
    if scale == 1.0 {
        return Ok(img.clone());
    }
    let (h, w) = img.dims();
    let rows = AxisWeights::new(h, oh, 1.0 / scale, method);
    let cols = AxisWeights::new(w, ow, 1.0 / scale, method);
    Ok(apply(img, &rows, &cols))
}

/// Resizes to exact target dimensions, stretching each axis independently.
pub fn resize_to(img: &GrayImage, out_h: usize, out_w: usize, method: ResizeMethod) -> Result<GrayImage> {
    check_dims(out_h, out_w)?;
    let (h, w) = img.dims();
    if (h, w) == (out_h, out_w) {
        return Ok(img.clone());
    }
    let rows = AxisWeights::new(h, out_h, h as f64 / out_h as f64, method);
    let cols = AxisWeights::new(w, out_w, w as f64 / out_w as f64, method);
    Ok(apply(img, &rows, &cols))
}

fn check_dims(out_h: usize, out_w: usize) -> Result<()> {
    if out_h == 0 || out_w == 0 {
        return Err(MsiqError::param(format!(
            "output dimensions must be positive, got {out_h}x{out_w}"
        )));
    }
    Ok(())
}

fn apply(img: &GrayImage, rows: &AxisWeights, cols: &AxisWeights) -> GrayImage {
    let h = img.height();
    let (out_h, out_w) = (rows.taps.len(), cols.taps.len());

    let mut tmp = vec![0.0; h * out_w];
    for r in 0..h {
        let src = img.row(r);
        let dst = &mut tmp[r * out_w..(r + 1) * out_w];
        for (d, taps) in dst.iter_mut().zip(&cols.taps) {
            *d = taps.iter().map(|&(k, wt)| wt * src[k]).sum();
        }
    }
    let mut out = vec![0.0; out_h * out_w];
    for (r, taps) in rows.taps.iter().enumerate() {
        let dst = &mut out[r * out_w..(r + 1) * out_w];
        for &(k, wt) in taps {
            let src = &tmp[k * out_w..(k + 1) * out_w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    GrayImage::from_raw_clamped(out_h, out_w, out)
}
