use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{RasterImage, VectorField};

use super::ExtendedTexture;

/// Loop length and playback rate. The crossfade is fixed: frame `k` sits at
/// `s = k / K`, blend factor `alpha(s) = s` and time shift `sigma(s) = s - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopSpec {
    pub frames: usize,
    pub fps: f64,
}

impl Default for LoopSpec {
    fn default() -> Self {
        LoopSpec { frames: 80, fps: 30.0 }
    }
}

impl LoopSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::config("frame count must be positive"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::config("fps must be positive"));
        }
        Ok(())
    }

    pub fn s(&self, k: usize) -> f64 {
        k as f64 / self.frames as f64
    }

    pub fn alpha(&self, s: f64) -> f64 {
        s.clamp(0.0, 1.0)
    }

    pub fn shift(&self, s: f64) -> f64 {
        s - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<RasterImage>,
    pub timestamps: Vec<f64>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Backward warp: `out(p) = texture(p + t * field(p))`; pixels with zero
/// displacement are copied from the source unchanged.
pub fn warp(texture: &ExtendedTexture, field: &VectorField, t: f64) -> Result<RasterImage> {
    if !(t.is_finite() && t.abs() <= 1.0) {
        return Err(Error::invalid("warp time must lie in [-1, 1]"));
    }
    let (w, h) = texture.source.dimensions();
    if field.dimensions() != (w, h) {
        return Err(Error::invalid("field and texture dimensions differ"));
    }
    let mut data = vec![0.0f32; w * h * 3];
    data.par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let d = field.get(x, y) * t;
            let c = if d == Vec2::ZERO {
                texture.source.pixel(x, y)
            } else {
                texture.sample(Vec2::new(x as f64, y as f64) + d)
            };
            row[x * 3..x * 3 + 3].copy_from_slice(&c);
        }
    });
    RasterImage::new(w, h, data)
}

/// `V(u)`: forward field for `u >= 0`, backward field for `u < 0`.
fn animation(texture: &ExtendedTexture, f1: &VectorField, f2: &VectorField, u: f64) -> Result<RasterImage> {
    if u >= 0.0 {
        warp(texture, f1, u)
    } else {
        warp(texture, f2, -u)
    }
}

/// `I(s) = alpha(s) V(s) + (1 - alpha(s)) V(s - 1)` at `s = k / K`.
pub fn render_frame(
    texture: &ExtendedTexture,
    f1: &VectorField,
    f2: &VectorField,
    spec: &LoopSpec,
    k: usize,
) -> Result<RasterImage> {
    let s = spec.s(k);
    let a = spec.alpha(s) as f32;
    let fwd = animation(texture, f1, f2, s)?;
    let back = animation(texture, f1, f2, spec.shift(s))?;
    let (w, h) = fwd.dimensions();
    let src = texture.source.data();
    let mut data = Vec::with_capacity(w * h * 3);
    for (i, (p, q)) in fwd.data().chunks(3).zip(back.data().chunks(3)).enumerate() {
        let (x, y) = (i % w, i / w);
        if f1.get(x, y) == Vec2::ZERO && f2.get(x, y) == Vec2::ZERO {
            data.extend_from_slice(&src[i * 3..i * 3 + 3]);
        } else {
            for c in 0..3 {
                data.push((a * p[c] + (1.0 - a) * q[c]).clamp(0.0, 1.0));
            }
        }
    }
    RasterImage::new(w, h, data)
}

/// All `K` frames, rendered in parallel.
pub fn blend_loop(texture: &ExtendedTexture, f1: &VectorField, f2: &VectorField, spec: &LoopSpec) -> Result<FrameSequence> {
    spec.validate()?;
    let frames: Vec<RasterImage> = (0..spec.frames)
        .into_par_iter()
        .map(|k| render_frame(texture, f1, f2, spec, k))
        .collect::<Result<_>>()?;
    let timestamps = (0..spec.frames).map(|k| k as f64 / spec.fps).collect();
    Ok(FrameSequence { frames, timestamps })
}
