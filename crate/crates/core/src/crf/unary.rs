use rayon::prelude::*;

use crate::descriptor::{squared_distance, DescriptorField};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{BinaryMask, VectorField};

use super::LabelSet;

/// Per-pixel displacement prior, defined on the masked pixels (zero elsewhere).
#[derive(Debug, Clone, PartialEq)]
pub struct GuessField {
    pub field: VectorField,
}

impl GuessField {
    pub fn get(&self, x: usize, y: usize) -> Vec2 {
        self.field.get(x, y)
    }
}

/// Propagate per-position offset magnitudes from a sampled line to every masked
/// pixel: each pixel takes the value of the nearest line sample, oriented along
/// `sign * direction`.
pub fn init_guess_field(
    mask: &BinaryMask,
    origin: Vec2,
    direction: Vec2,
    magnitudes: &[f64],
    sign: f64,
) -> Result<GuessField> {
    if magnitudes.is_empty() {
        return Err(Error::invalid("guess field needs at least one line sample"));
    }
    let d = direction
        .normalized()
        .ok_or_else(|| Error::invalid("degenerate guess direction"))?;
    let n = magnitudes.len();
    let (w, h) = mask.dimensions();
    let mut field = VectorField::zeros(w, h);
    for (x, y) in mask.active_pixels() {
        let t = (Vec2::new(x as f64, y as f64) - origin).dot(d);
        let k = t.round().clamp(0.0, (n - 1) as f64) as usize;
        field.set(x, y, d * (sign * magnitudes[k]));
    }
    Ok(GuessField { field })
}

/// Unary costs for every masked pixel (raster order) and label.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryVolume {
    width: usize,
    height: usize,
    pixels: Vec<(usize, usize)>,
    labels: usize,
    costs: Vec<f64>,
}

impl UnaryVolume {
    pub fn new(width: usize, height: usize, pixels: Vec<(usize, usize)>, labels: usize, costs: Vec<f64>) -> Result<Self> {
        if labels == 0 {
            return Err(Error::invalid("unary volume needs at least one label"));
        }
        if costs.len() != pixels.len() * labels {
            return Err(Error::invalid("unary cost count mismatch"));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("unary costs must be finite and non-negative"));
        }
        if pixels.iter().any(|(x, y)| *x >= width || *y >= height) {
            return Err(Error::invalid("unary pixel out of bounds"));
        }
        Ok(UnaryVolume { width, height, pixels, labels, costs })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    /// Costs of pixel `i` (index into `pixels`) for all labels.
    pub fn costs(&self, i: usize) -> &[f64] {
        &self.costs[i * self.labels..(i + 1) * self.labels]
    }

    pub fn costs_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.costs[i * self.labels..(i + 1) * self.labels]
    }

    pub fn raw(&self) -> &[f64] {
        &self.costs
    }
}

pub const DEFAULT_LAMBDA: f64 = 0.1;

/// `psi(p, x) = |F(p) - F(round(p + x))|^2 * (1 + lambda * | |x| - |g(p)| |)`,
/// with the target clamped into the image.
pub fn compute_unary(
    descriptors: &DescriptorField,
    labels: &LabelSet,
    guess: &GuessField,
    mask: &BinaryMask,
    lambda: f64,
) -> Result<UnaryVolume> {
    let (w, h) = mask.dimensions();
    if (descriptors.width(), descriptors.height()) != (w, h) || guess.field.dimensions() != (w, h) {
        return Err(Error::invalid("descriptor, guess and mask dimensions differ"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda must be finite and non-negative"));
    }
    let pixels: Vec<(usize, usize)> = mask.active_pixels().collect();
    let nl = labels.len();
    let mut costs = vec![0.0; pixels.len() * nl];
    costs.par_chunks_mut(nl).zip(pixels.par_iter()).for_each(|(row, &(x, y))| {
        let here = descriptors.at(x, y);
        let g = guess.get(x, y).norm();
        for (c, v) in row.iter_mut().zip(labels.vectors()) {
            let tx = (x as f64 + v.x).round() as isize;
            let ty = (y as f64 + v.y).round() as isize;
            let there = descriptors.at_clamped(tx, ty);
            *c = squared_distance(here, there) * (1.0 + lambda * (v.norm() - g).abs());
        }
    });
    UnaryVolume::new(w, h, pixels, nl, costs)
}
