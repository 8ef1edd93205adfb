//! Grayscale image representation and file I/O.
//!
//! Every computation in this crate runs on [`GrayImage`]: a row-major grid of
//! real intensities in `[0, 1]`. Quantization to 8 bits happens only when
//! writing files or feeding the JPEG codec.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{MsiqError, Result};

/// ITU-R BT.601 luma weights for (red, green, blue).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Single-channel image with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major data, validating shape and range.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(MsiqError::Shape(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(MsiqError::Shape(format!(
                "expected {} samples for {height}x{width}, got {}",
                height * width,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MsiqError::param(format!(
                "intensity {bad} outside [0, 1]"
            )));
        }
        Ok(GrayImage {
            height,
            width,
            data,
        })
    }

    /// Builds an image by evaluating `f(row, col)`; values are clamped to `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(clamp_unit(f(r, c)));
            }
        }
        GrayImage {
            height,
            width,
            data,
        }
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        Self::from_fn(height, width, |_, _| value)
    }

    /// Wraps already-computed samples, clamping into `[0, 1]`. NaN maps to 0.
    pub(crate) fn from_raw_clamped(height: usize, width: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        GrayImage {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Maps every intensity through `f`, clamping the result.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> GrayImage {
        let data = self.data.iter().map(|&v| clamp_unit(f(v))).collect();
        GrayImage {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Quantizes to 8-bit codes with `round(i * 255)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_u8(height: usize, width: usize, codes: &[u8]) -> Result<Self> {
        let data = codes.iter().map(|&c| f64::from(c) / 255.0).collect();
        Self::new(height, width, data)
    }

    /// Pastes `self` into a zero canvas of the given size at `(row_off, col_off)`.
    pub fn embed(&self, height: usize, width: usize, row_off: usize, col_off: usize) -> Result<Self> {
        if row_off + self.height > height || col_off + self.width > width {
            return Err(MsiqError::Shape(format!(
                "{}x{} at ({row_off}, {col_off}) does not fit in {height}x{width}",
                self.height, self.width
            )));
        }
        let mut data = vec![0.0; height * width];
        for r in 0..self.height {
            let dst = (r + row_off) * width + col_off;
            data[dst..dst + self.width].copy_from_slice(self.row(r));
        }
        Ok(GrayImage {
            height,
            width,
            data,
        })
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Planar RGB samples at a known bit depth.
#[derive(Clone, Debug)]
pub struct RgbImage {
    pub height: usize,
    pub width: usize,
    pub bit_depth: u8,
    pub red: Vec<u16>,
    pub green: Vec<u16>,
    pub blue: Vec<u16>,
}

/// Converts RGB to luma with [`LUMA_WEIGHTS`].
pub fn to_gray(rgb: &RgbImage) -> Result<GrayImage> {
    let n = rgb.height * rgb.width;
    if rgb.red.len() != n || rgb.green.len() != n || rgb.blue.len() != n {
        return Err(MsiqError::Shape(format!(
            "channel lengths {}/{}/{} do not match {}x{}",
            rgb.red.len(),
            rgb.green.len(),
            rgb.blue.len(),
            rgb.height,
            rgb.width
        )));
    }
    if rgb.bit_depth == 0 || rgb.bit_depth > 16 {
        return Err(MsiqError::param(format!("unsupported bit depth {}", rgb.bit_depth)));
    }
    let max = f64::from((1u32 << rgb.bit_depth) - 1);
    let [wr, _, wb] = LUMA_WEIGHTS;
    let data = rgb
        .red
        .iter()
        .zip(&rgb.green)
        .zip(&rgb.blue)
        .map(|((&r, &g), &b)| {
            let (r, g, b) = (f64::from(r) / max, f64::from(g) / max, f64::from(b) / max);
            // Equals wr*r + wg*g + wb*b since the weights sum to 1; exact for gray input.
            g + wr * (r - g) + wb * (b - g)
        })
        .collect();
    if rgb.height == 0 || rgb.width == 0 {
        return Err(MsiqError::Shape("empty image".into()));
    }
    Ok(GrayImage::from_raw_clamped(rgb.height, rgb.width, data))
}

fn planes_from_interleaved<T: Copy + Into<u16>>(
    height: usize,
    width: usize,
    bit_depth: u8,
    samples: &[T],
    channels: usize,
) -> RgbImage {
    let n = height * width;
    let mut rgb = RgbImage {
        height,
        width,
        bit_depth,
        red: Vec::with_capacity(n),
        green: Vec::with_capacity(n),
        blue: Vec::with_capacity(n),
    };
    // Alpha, when present, is the trailing channel and is dropped.
    for px in samples.chunks_exact(channels) {
        rgb.red.push(px[0].into());
        rgb.green.push(px[1].into());
        rgb.blue.push(px[2].into());
    }
    rgb
}

/// Decodes a PNG, JPEG or binary PGM file into a normalized grayscale image.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| MsiqError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| MsiqError::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg | ImageFormat::Pnm) => {}
        other => {
            return Err(MsiqError::Decode {
                path: path.to_path_buf(),
                message: format!("unsupported format {other:?}"),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => MsiqError::io(path, io),
        other => MsiqError::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    dynamic_to_gray(decoded).map_err(|message| MsiqError::Decode {
        path: path.to_path_buf(),
        message,
    })
}

fn dynamic_to_gray(img: DynamicImage) -> std::result::Result<GrayImage, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err("image has zero size".into());
    }
    let gray = match img {
        DynamicImage::ImageLuma8(buf) => {
            GrayImage::from_raw_clamped(h, w, buf.iter().map(|&c| f64::from(c) / 255.0).collect())
        }
        DynamicImage::ImageLumaA8(buf) => GrayImage::from_raw_clamped(
            h,
            w,
            buf.chunks_exact(2).map(|px| f64::from(px[0]) / 255.0).collect(),
        ),
        DynamicImage::ImageLuma16(buf) => GrayImage::from_raw_clamped(
            h,
            w,
            buf.iter().map(|&c| f64::from(c) / 65535.0).collect(),
        ),
        DynamicImage::ImageLumaA16(buf) => GrayImage::from_raw_clamped(
            h,
            w,
            buf.chunks_exact(2).map(|px| f64::from(px[0]) / 65535.0).collect(),
        ),
        DynamicImage::ImageRgb8(buf) => to_gray(&planes_from_interleaved(h, w, 8, &buf, 3))
            .map_err(|e| e.to_string())?,
        DynamicImage::ImageRgba8(buf) => to_gray(&planes_from_interleaved(h, w, 8, &buf, 4))
            .map_err(|e| e.to_string())?,
        DynamicImage::ImageRgb16(buf) => to_gray(&planes_from_interleaved(h, w, 16, &buf, 3))
            .map_err(|e| e.to_string())?,
        DynamicImage::ImageRgba16(buf) => to_gray(&planes_from_interleaved(h, w, 16, &buf, 4))
            .map_err(|e| e.to_string())?,
        other => return Err(format!("unsupported pixel layout {:?}", other.color())),
    };
    Ok(gray)
}

/// Writes an 8-bit grayscale PNG (`.png`) or binary PGM (`.pgm`).
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let is_png = match ext.as_deref() {
        Some("png") => true,
        Some("pgm") => false,
        _ => {
            return Err(MsiqError::param(format!(
                "cannot infer output format from {}; use .png or .pgm",
                path.display()
            )))
        }
    };
    let file = File::create(path).map_err(|e| MsiqError::io(path, e))?;
    let writer = BufWriter::new(file);
    let codes = img.to_u8();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let res = if is_png {
        PngEncoder::new(writer).write_image(&codes, w, h, image::ExtendedColorType::L8)
    } else {
        PnmEncoder::new(writer)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&codes, w, h, image::ExtendedColorType::L8)
    };
    res.map_err(|e| match e {
        image::ImageError::IoError(io) => MsiqError::io(path, io),
        other => MsiqError::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
