//! PNG/JPEG decoding to unit-normalized tensors and 0/255 grayscale mask
//! encoding.

use std::path::Path;

use image as img;
use ndarray::Array3;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};

/// Decodes an 8-bit grayscale or RGB raster file to values in `[0, 1]`
/// (`byte / 255`). 16-bit and alpha layouts are rejected.
pub fn load_image(path: &Path) -> Result<Image> {
    let dynamic = img::open(path).map_err(|source| match source {
        img::ImageError::IoError(e) => Error::Io { path: path.to_owned(), source: e },
        other => Error::Decode { path: path.to_owned(), source: other },
    })?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            detail: "zero-dimension image".into(),
        });
    }
    let data = match dynamic {
        img::DynamicImage::ImageLuma8(buf) => {
            Array3::from_shape_fn((1, h, w), |(_, r, c)| {
                f64::from(buf.get_pixel(c as u32, r as u32).0[0]) / 255.0
            })
        }
        img::DynamicImage::ImageRgb8(buf) => {
            Array3::from_shape_fn((3, h, w), |(ch, r, c)| {
                f64::from(buf.get_pixel(c as u32, r as u32).0[ch]) / 255.0
            })
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                detail: format!("expected 8-bit gray or RGB, got {:?}", other.color()),
            })
        }
    };
    Image::new(data)
}

/// Decodes an 8-bit grayscale PNG mask, binarizing at threshold 128.
pub fn load_mask(path: &Path) -> Result<Mask> {
    let dynamic = img::open(path).map_err(|source| match source {
        img::ImageError::IoError(e) => Error::Io { path: path.to_owned(), source: e },
        other => Error::Decode { path: path.to_owned(), source: other },
    })?;
    let buf = match dynamic {
        img::DynamicImage::ImageLuma8(buf) => buf,
        img::DynamicImage::ImageRgb8(buf) => img::DynamicImage::ImageRgb8(buf).to_luma8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                detail: format!("expected 8-bit gray mask, got {:?}", other.color()),
            })
        }
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            detail: "zero-dimension mask".into(),
        });
    }
    Mask::new(ndarray::Array2::from_shape_fn((h, w), |(r, c)| {
        u8::from(buf.get_pixel(c as u32, r as u32).0[0] >= 128)
    }))
}

/// Writes a unit-range image as an 8-bit PNG (values scaled by 255 and
/// rounded). Single-channel images encode as grayscale, three-channel
/// as RGB.
pub fn save_image(image: &Image, path: &Path) -> Result<()> {
    let (c, h, w) = (image.channels(), image.height(), image.width());
    let quantize = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let result = match c {
        1 => {
            let mut buf = img::GrayImage::new(w as u32, h as u32);
            for r in 0..h {
                for col in 0..w {
                    buf.put_pixel(col as u32, r as u32, img::Luma([quantize(image.data()[(0, r, col)])]));
                }
            }
            buf.save_with_format(path, img::ImageFormat::Png)
        }
        3 => {
            let mut buf = img::RgbImage::new(w as u32, h as u32);
            for r in 0..h {
                for col in 0..w {
                    let px = [
                        quantize(image.data()[(0, r, col)]),
                        quantize(image.data()[(1, r, col)]),
                        quantize(image.data()[(2, r, col)]),
                    ];
                    buf.put_pixel(col as u32, r as u32, img::Rgb(px));
                }
            }
            buf.save_with_format(path, img::ImageFormat::Png)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "can only encode 1- or 3-channel images, got {other}"
            )))
        }
    };
    result.map_err(|source| Error::Encode { path: path.to_owned(), source })
}

/// Writes a mask as an 8-bit grayscale PNG with 1 -> 255 and 0 -> 0.
pub fn save_mask(mask: &Mask, path: &Path) -> Result<()> {
    let (h, w) = (mask.height(), mask.width());
    let mut buf = img::GrayImage::new(w as u32, h as u32);
    for r in 0..h {
        for c in 0..w {
            buf.put_pixel(c as u32, r as u32, img::Luma([mask.get(r, c) * 255]));
        }
    }
    buf.save_with_format(path, img::ImageFormat::Png)
        .map_err(|source| Error::Encode { path: path.to_owned(), source })
}
