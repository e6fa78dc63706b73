//! PNG input/output for images and masks.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::Result;
use crate::raster::{BinaryMask, RasterImage};

fn from_dynamic(img: DynamicImage) -> RasterImage {
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|v| v as f32 / 255.0).collect();
    RasterImage::from_raw_unchecked(w as usize, h as usize, data)
}

fn mask_from_dynamic(img: DynamicImage) -> Result<BinaryMask> {
    let g = img.to_luma8();
    let (w, h) = g.dimensions();
    BinaryMask::new(w as usize, h as usize, g.into_raw().into_iter().map(|v| v >= 128).collect())
}

/// Read an RGB or RGBA PNG; alpha is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    Ok(from_dynamic(image::open(path)?))
}

pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    Ok(from_dynamic(image::load_from_memory(bytes)?))
}

/// Read an 8-bit grayscale mask; values >= 128 are active.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    mask_from_dynamic(image::open(path)?)
}

pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    mask_from_dynamic(image::load_from_memory(bytes)?)
}

/// Quantize to 8 bits per channel (round to nearest).
pub fn to_rgb8(img: &RasterImage) -> Vec<u8> {
    img.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
}

fn rgb_image(img: &RasterImage) -> RgbImage {
    RgbImage::from_raw(img.width() as u32, img.height() as u32, to_rgb8(img))
        .expect("buffer matches dimensions")
}

pub fn write_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    rgb_image(img).save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    rgb_image(img).write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

fn gray_image(mask: &BinaryMask) -> GrayImage {
    let data = mask.data().iter().map(|m| if *m { 255 } else { 0 }).collect();
    GrayImage::from_raw(mask.width() as u32, mask.height() as u32, data).expect("buffer matches dimensions")
}

pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    gray_image(mask).save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    gray_image(mask).write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}
