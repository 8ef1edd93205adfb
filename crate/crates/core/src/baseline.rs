//! Pixel-space reference metrics: PSNR and Gaussian-window SSIM.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::image::GrayImage;

/// PSNR in decibels, or infinite for identical images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PsnrValue {
    Finite(f64),
    Infinite,
}

impl PsnrValue {
    pub fn is_infinite(self) -> bool {
        matches!(self, PsnrValue::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PsnrValue::Finite(v) => Some(v),
            PsnrValue::Infinite => None,
        }
    }

    /// As `f64`, with `Infinite` mapped to `+inf`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for PsnrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsnrValue::Finite(v) => write!(f, "{v:.4}"),
            PsnrValue::Infinite => f.write_str("inf"),
        }
    }
}

fn same_shape(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(MsiqError::Shape(format!(
            "{}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    Ok(())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio with peak value 1.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<PsnrValue> {
    let e = mse(a, b)?;
    if e == 0.0 {
        Ok(PsnrValue::Infinite)
    } else {
        Ok(PsnrValue::Finite(10.0 * (1.0 / e).log10()))
    }
}

/// SSIM parameters. Defaults are the canonical 11x11, sigma 1.5 Gaussian window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub data_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            data_range: 1.0,
        }
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size as f64 - 1.0) / 2.0;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable filtering keeping only positions where the window fits.
fn filter_valid(src: &[f64], h: usize, w: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (oh, ow) = (h + 1 - n, w + 1 - n);
    let mut tmp = vec![0.0; h * ow];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        for c in 0..ow {
            tmp[r * ow + c] = row[c..c + n].iter().zip(k).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for (t, &kv) in k.iter().enumerate() {
            let src_row = &tmp[(r + t) * ow..(r + t + 1) * ow];
            let dst = &mut out[r * ow..(r + 1) * ow];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += kv * s;
            }
        }
    }
    out
}

pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    ssim_with(a, b, &SsimConfig::default())
}

/// Mean SSIM over all window positions that lie fully inside the image.
pub fn ssim_with(a: &GrayImage, b: &GrayImage, cfg: &SsimConfig) -> Result<f64> {
    same_shape(a, b)?;
    let (h, w) = a.dims();
    if cfg.window == 0 || h < cfg.window || w < cfg.window {
        return Err(MsiqError::param(format!(
            "SSIM window {} does not fit a {h}x{w} image",
            cfg.window
        )));
    }
    let k = gaussian_kernel(cfg.window, cfg.sigma);
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(x, h, w, &k);
    let mu_y = filter_valid(y, h, w, &k);
    let e_xx = filter_valid(&xx, h, w, &k);
    let e_yy = filter_valid(&yy, h, w, &k);
    let e_xy = filter_valid(&xy, h, w, &k);
    let c1 = (cfg.k1 * cfg.data_range).powi(2);
    let c2 = (cfg.k2 * cfg.data_range).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}
