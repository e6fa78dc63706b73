use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{RasterImage, VectorField};

const FLOW_MAGIC: &[u8; 4] = b"ELFF";

/// `ELFF`, width and height as little-endian u32, then interleaved dx, dy f32.
pub fn encode_flow(field: &VectorField) -> Vec<u8> {
    let (w, h) = field.dimensions();
    let mut out = Vec::with_capacity(12 + w * h * 8);
    out.extend_from_slice(FLOW_MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for v in field.data() {
        out.extend_from_slice(&(v.x as f32).to_le_bytes());
        out.extend_from_slice(&(v.y as f32).to_le_bytes());
    }
    out
}

pub fn decode_flow(bytes: &[u8]) -> Result<VectorField> {
    if bytes.len() < 12 || &bytes[..4] != FLOW_MAGIC {
        return Err(Error::invalid("not an ELFF flow file"));
    }
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let (w, h) = (u(4), u(8));
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::invalid("flow dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::invalid(format!("flow file is {} bytes, expected {expected}", bytes.len())));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as f64;
    let data = (0..w * h).map(|i| Vec2::new(f(12 + 8 * i), f(16 + 8 * i))).collect();
    VectorField::new(w, h, data)
}

pub fn write_flow(field: &VectorField, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_flow(field))?;
    Ok(())
}

pub fn read_flow(path: impl AsRef<Path>) -> Result<VectorField> {
    decode_flow(&std::fs::read(path)?)
}

/// Hue from direction, value from magnitude relative to the field maximum.
pub fn flow_to_hsv(field: &VectorField) -> RasterImage {
    let (w, h) = field.dimensions();
    let max = field.max_magnitude().max(1e-12);
    let mut data = Vec::with_capacity(w * h * 3);
    for v in field.data() {
        let hue = (v.angle().to_degrees().rem_euclid(360.0)) / 60.0;
        let val = (v.norm() / max) as f32;
        let c = val;
        let x = c * (1.0 - ((hue % 2.0) - 1.0).abs() as f32);
        let rgb = match hue as u32 {
            0 => [c, x, 0.0],
            1 => [x, c, 0.0],
            2 => [0.0, c, x],
            3 => [0.0, x, c],
            4 => [x, 0.0, c],
            _ => [c, 0.0, x],
        };
        data.extend_from_slice(&rgb);
    }
    RasterImage::new(w, h, data).expect("values in range")
}
