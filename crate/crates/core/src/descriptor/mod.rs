//! Per-pixel feature vectors for the perceptual distance in the unary term and
//! for best-buddy matching. Two backends: a hand-crafted patch descriptor and a
//! small stack of convolution layers loaded from a weights file.

mod conv;
mod patch;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

pub use conv::{ConvLayer, ConvStack};
pub use patch::PATCH_DEFAULT_RADIUS;

/// Dense per-pixel descriptors, `dim` values per pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorField {
    width: usize,
    height: usize,
    dim: usize,
    data: Vec<f32>,
}

impl DescriptorField {
    pub fn new(width: usize, height: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 || data.len() != width * height * dim {
            return Err(Error::invalid("descriptor buffer does not match dimensions"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("descriptor contains non-finite entries"));
        }
        Ok(DescriptorField {
            width,
            height,
            dim,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.dim;
        &self.data[i..i + self.dim]
    }

    /// Descriptor at the pixel nearest to (x, y), clamped to the raster.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> &[f32] {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.at(x, y)
    }
}

/// Which descriptor implementation a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DescriptorBackend {
    /// RGB patch of side 2r+1 plus per-channel Sobel gradients, unit-normalized.
    Patch { radius: usize },
    /// Stacked 3x3 convolutions + ReLU; every layer's activations are concatenated.
    ConvWeights { path: PathBuf },
}

impl Default for DescriptorBackend {
    fn default() -> Self {
        DescriptorBackend::Patch {
            radius: PATCH_DEFAULT_RADIUS,
        }
    }
}

impl DescriptorBackend {
    pub fn name(&self) -> &'static str {
        match self {
            DescriptorBackend::Patch { .. } => "patch",
            DescriptorBackend::ConvWeights { .. } => "conv-weights",
        }
    }
}

pub fn compute_descriptors(image: &RasterImage, backend: &DescriptorBackend) -> Result<DescriptorField> {
    match backend {
        DescriptorBackend::Patch { radius } => patch::patch_descriptors(image, *radius),
        DescriptorBackend::ConvWeights { path } => {
            let stack = ConvStack::read(path)?;
            stack.descriptors(image)
        }
    }
}

/// Squared Euclidean distance between two descriptors.
pub fn descriptor_distance(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "descriptor dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(squared_distance(a, b))
}

#[inline]
pub(crate) fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum()
}

/// Fill rows of a raster in parallel; `f` writes one row of `row_len` values.
pub(crate) fn par_rows<F>(height: usize, row_len: usize, f: F) -> Vec<f32>
where
    F: Fn(usize, &mut [f32]) + Sync,
{
    let mut out = vec![0.0f32; height * row_len];
    out.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn distance_identity_and_orthonormal() {
        let v = [0.3f32, -0.2, 0.9];
        assert_eq!(descriptor_distance(&v, &v).unwrap(), 0.0);
        assert_eq!(descriptor_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert!(descriptor_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn distance_matches_direct_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: Vec<f32> = (0..153).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f32> = (0..153).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut brute = 0.0f64;
            for i in 0..153 {
                brute += (a[i] as f64 - b[i] as f64).powi(2);
            }
            let d = descriptor_distance(&a, &b).unwrap();
            assert!((d - brute).abs() < 1e-12);
            assert_eq!(d, descriptor_distance(&b, &a).unwrap());
        }
    }
}
