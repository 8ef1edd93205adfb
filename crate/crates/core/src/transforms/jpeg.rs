use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::error::{MsiqError, Result};
use crate::image::GrayImage;

/// Encoder quality for strength `lambda`: `max(1, round(100 - 80 * lambda))`.
pub fn jpeg_quality_for(lambda: f64) -> u8 {
    (100.0 - 80.0 * lambda).round().clamp(1.0, 100.0) as u8
}

/// Baseline 8-bit grayscale JPEG encode/decode at the given quality.
pub fn jpeg_round_trip(img: &GrayImage, quality: u8) -> Result<GrayImage> {
    let (h, w) = img.dims();
    if h > u16::MAX as usize || w > u16::MAX as usize {
        return Err(MsiqError::param(format!("{h}x{w} exceeds JPEG dimension limits")));
    }
    let quality = quality.clamp(1, 100);
    let codes = img.to_u8();
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(&codes, w as u32, h as u32, ExtendedColorType::L8)
        .map_err(|e| MsiqError::param(format!("JPEG encode failed: {e}")))?;
    let decoded = image::load(Cursor::new(buf), ImageFormat::Jpeg)
        .map_err(|e| MsiqError::param(format!("JPEG decode failed: {e}")))?
        .to_luma8();
    GrayImage::from_u8(h, w, decoded.as_raw())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quality_mapping() {
        assert_eq!(jpeg_quality_for(0.0), 100);
        assert_eq!(jpeg_quality_for(0.05), 96);
        assert_eq!(jpeg_quality_for(0.10), 92);
        assert_eq!(jpeg_quality_for(0.15), 88);
        assert_eq!(jpeg_quality_for(0.20), 84);
        assert_eq!(jpeg_quality_for(2.0), 1);
    }

    #[test]
    fn round_trip_is_close_at_q100() {
        let img = GrayImage::from_fn(24, 40, |r, c| 0.5 + 0.4 * ((r as f64) / 5.0).sin() * ((c as f64) / 7.0).cos());
        let out = jpeg_round_trip(&img, 100).unwrap();
        assert_eq!(out.dims(), img.dims());
        let max_err = img
            .data()
            .iter()
            .zip(out.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 4.0 / 255.0, "{max_err}");
        // lower quality loses more
        let low = jpeg_round_trip(&img, 20).unwrap();
        let e100 = crate::baseline::mse(&img, &out).unwrap();
        let e20 = crate::baseline::mse(&img, &low).unwrap();
        assert!(e20 > e100);
    }

    #[test]
    fn deterministic() {
        let img = GrayImage::from_fn(17, 23, |r, c| ((r * c) % 13) as f64 / 12.0);
        assert_eq!(jpeg_round_trip(&img, 84).unwrap(), jpeg_round_trip(&img, 84).unwrap());
    }
}
