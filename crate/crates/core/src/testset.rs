//! Procedural stand-ins for the six-image standard test set.
//!
//! Each generator is deterministic and anti-aliased by 4x4 supersampling, so
//! the images behave like band-limited photographs under resampling:
//!
//! * `gradient` - diagonal luminance ramp with a soft vignette
//! * `checkerboard` - 8x8-cell board over a weak ramp
//! * `disk` - off-center bright disk and ellipse on a dark field
//! * `stripes` - dark "words" on rows of a light page, like scanned text
//! * `blobs` - field of Gaussian blobs
//! * `texture` - multi-octave value noise, a proxy for natural texture
//!
//! Real photographs can be used instead via [`load_directory`].

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MsiqError, Result};
use crate::image::{load_image, GrayImage};

/// An image with a stable identifier used as the report key.
#[derive(Clone, Debug)]
pub struct NamedImage {
    pub id: String,
    pub image: GrayImage,
}

impl NamedImage {
    pub fn new(id: impl Into<String>, image: GrayImage) -> Self {
        NamedImage {
            id: id.into(),
            image,
        }
    }
}

/// Default height of the generated images; width is 5/4 of the height.
pub const DEFAULT_SIZE: usize = 256;

pub const STANDARD_NAMES: [&str; 6] = ["gradient", "checkerboard", "disk", "stripes", "blobs", "texture"];

/// The six standard images at the default size.
pub fn standard_set() -> Vec<NamedImage> {
    standard_set_sized(DEFAULT_SIZE)
}

pub fn standard_set_sized(height: usize) -> Vec<NamedImage> {
    STANDARD_NAMES
        .iter()
        .map(|name| NamedImage::new(*name, standard_image(name, height).expect("known name")))
        .collect()
}

/// Generates one standard image by name.
pub fn standard_image(name: &str, height: usize) -> Result<GrayImage> {
    let height = height.max(16);
    let width = height + height / 4;
    let img = match name {
        "gradient" => supersample(height, width, |x, y| {
            let ramp = 0.15 + 0.55 * x + 0.25 * y;
            let v = ((x - 0.45).powi(2) + (y - 0.5).powi(2)) * 1.2;
            ramp * (1.0 - 0.35 * v)
        }),
        "checkerboard" => supersample(height, width, |x, y| {
            let cells = 8.0;
            let cx = (x * cells).floor() as i64;
            let cy = (y * cells * height as f64 / width as f64).floor() as i64;
            let base = if (cx + cy) % 2 == 0 { 0.78 } else { 0.22 };
            base * (0.85 + 0.15 * y)
        }),
        "disk" => supersample(height, width, |x, y| {
            let aspect = width as f64 / height as f64;
            let (dx, dy) = (x - 0.42, (y - 0.58) * aspect);
            let disk = (dx * dx + dy * dy).sqrt() < 0.26;
            let (ex, ey) = ((x - 0.78) / 0.08, (y - 0.22) * aspect / 0.16);
            let ellipse = ex * ex + ey * ey < 1.0;
            if disk {
                0.9
            } else if ellipse {
                0.6
            } else {
                0.06
            }
        }),
        "stripes" => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5712_1935);
            let lines = 9;
            let mut words: Vec<(f64, f64, f64, f64)> = Vec::new();
            for line in 0..lines {
                let top = 0.08 + line as f64 * 0.095;
                let mut left = 0.06 + rng.random_range(0.0..0.05);
                let right_margin = if line == lines - 1 { 0.55 } else { 0.94 };
                while left < right_margin {
                    let len: f64 = rng.random_range(0.04..0.16);
                    let right = (left + len).min(right_margin);
                    words.push((top, top + 0.045, left, right));
                    left = right + rng.random_range(0.02..0.04);
                }
            }
            supersample(height, width, move |x, y| {
                let ink = words
                    .iter()
                    .any(|&(t, b, l, r)| x >= t && x < b && y >= l && y < r);
                if ink {
                    0.12
                } else {
                    0.88 - 0.1 * x
                }
            })
        }
        "blobs" => {
            let mut rng = ChaCha8Rng::seed_from_u64(0xB10B_5EED);
            let blobs: Vec<(f64, f64, f64, f64)> = (0..14)
                .map(|_| {
                    (
                        rng.random_range(0.1..0.9),
                        rng.random_range(0.1..0.9),
                        rng.random_range(0.03..0.12),
                        rng.random_range(0.25..0.7),
                    )
                })
                .collect();
            supersample(height, width, move |x, y| {
                0.05 + blobs
                    .iter()
                    .map(|&(bx, by, s, a)| a * (-((x - bx).powi(2) + (y - by).powi(2)) / (2.0 * s * s)).exp())
                    .sum::<f64>()
            })
        }
        "texture" => {
            let noise = ValueNoise::new(0x7E57_0001, &[(3, 0.45), (6, 0.25), (12, 0.15), (24, 0.08)]);
            supersample(height, width, move |x, y| 0.5 + noise.eval(x, y) * 0.75 + 0.1 * (x - 0.5))
        }
        other => {
            return Err(MsiqError::param(format!(
                "unknown standard image '{other}' (expected one of {})",
                STANDARD_NAMES.join(", ")
            )))
        }
    };
    Ok(img)
}

/// Evaluates `f(x, y)` on normalized coordinates with 4x4 samples per pixel,
/// quantized to 8-bit levels like a stored image file.
fn supersample(height: usize, width: usize, f: impl Fn(f64, f64) -> f64) -> GrayImage {
    const N: usize = 4;
    let img = GrayImage::from_fn(height, width, |r, c| {
        let mut acc = 0.0;
        for a in 0..N {
            for b in 0..N {
                let x = (r as f64 + (a as f64 + 0.5) / N as f64) / height as f64;
                let y = (c as f64 + (b as f64 + 0.5) / N as f64) / width as f64;
                acc += f(x, y);
            }
        }
        acc / (N * N) as f64
    });
    img.map(|v| (v * 255.0).round() / 255.0)
}

/// Smoothly interpolated lattice noise summed over octaves.
struct ValueNoise {
    octaves: Vec<(usize, f64, Vec<f64>)>,
}

impl ValueNoise {
    fn new(seed: u64, octaves: &[(usize, f64)]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let octaves = octaves
            .iter()
            .map(|&(cells, amp)| {
                let lattice = (0..(cells + 1) * (cells + 1))
                    .map(|_| rng.random_range(-0.5..0.5))
                    .collect();
                (cells, amp, lattice)
            })
            .collect();
        ValueNoise { octaves }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        self.octaves
            .iter()
            .map(|(cells, amp, lattice)| {
                let n = *cells;
                let (fx, fy) = (x.clamp(0.0, 1.0) * n as f64, y.clamp(0.0, 1.0) * n as f64);
                let (ix, iy) = ((fx.floor() as usize).min(n - 1), (fy.floor() as usize).min(n - 1));
                let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
                let at = |i: usize, j: usize| lattice[i * (n + 1) + j];
                let top = at(ix, iy) * (1.0 - ty) + at(ix, iy + 1) * ty;
                let bottom = at(ix + 1, iy) * (1.0 - ty) + at(ix + 1, iy + 1) * ty;
                amp * (top * (1.0 - tx) + bottom * tx)
            })
            .sum()
    }
}

/// Loads every PNG/JPEG/PGM file in `dir`, sorted by file name.
pub fn load_directory(dir: impl AsRef<Path>) -> Result<Vec<NamedImage>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| MsiqError::io(dir, e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg" | "pgm"))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort();
    let images = paths
        .iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            load_image(p).map(|img| NamedImage::new(id, img))
        })
        .collect::<Result<Vec<_>>>()?;
    if images.is_empty() {
        return Err(MsiqError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no PNG, JPEG or PGM images found"),
        ));
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_set_is_deterministic_and_valid() {
        let a = standard_set_sized(32);
        let b = standard_set_sized(32);
        assert_eq!(a.len(), 6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image, y.image);
            assert_eq!(x.image.dims(), (32, 40));
            assert!(x.image.data().iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(x.image.sum() > 1.0);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(standard_image("lena", 32).is_err());
    }

    #[test]
    fn empty_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_directory(dir.path()), Err(MsiqError::Io { .. })));
        assert!(matches!(load_directory(dir.path().join("missing")), Err(MsiqError::Io { .. })));
    }
}
