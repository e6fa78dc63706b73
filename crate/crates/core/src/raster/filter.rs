//! Separable Gaussian filtering, optionally restricted to a support mask.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{BinaryMask, RasterImage, ScalarField, VectorField};

/// Normalized 1D Gaussian taps for offsets -r..=r, r = ceil(3 sigma).
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Half-sample symmetric reflection of an index into [0, n).
///
/// The resulting convolution matrix is symmetric, so a normalized kernel keeps
/// both constants and the global mean intact.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Convolve `channels`-interleaved planar data along x then y.
pub(crate) fn convolve_separable(
    data: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    kernel: &[f64],
) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let xx = reflect_index(x as isize + k as isize - r, width);
                    acc += w * data[(row + xx) * channels + c];
                }
                tmp[(row + x) * channels + c] = acc;
            }
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let yy = reflect_index(y as isize + k as isize - r, height);
                    acc += w * tmp[(yy * width + x) * channels + c];
                }
                out[(y * width + x) * channels + c] = acc;
            }
        }
    }
    out
}

/// Types that can be filtered as interleaved real-valued planes.
pub trait Planar: Sized {
    fn planar_dims(&self) -> (usize, usize);
    fn planar_channels(&self) -> usize;
    fn to_planar(&self) -> Vec<f64>;
    fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Self;
}

impl Planar for ScalarField {
    fn planar_dims(&self) -> (usize, usize) {
        self.dimensions()
    }
    fn planar_channels(&self) -> usize {
        1
    }
    fn to_planar(&self) -> Vec<f64> {
        self.data().to_vec()
    }
    fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Self {
        ScalarField::new(width, height, data).expect("dimensions preserved")
    }
}

impl Planar for VectorField {
    fn planar_dims(&self) -> (usize, usize) {
        self.dimensions()
    }
    fn planar_channels(&self) -> usize {
        2
    }
    fn to_planar(&self) -> Vec<f64> {
        self.data().iter().flat_map(|v| [v.x, v.y]).collect()
    }
    fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Self {
        let v = data.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        VectorField::new(width, height, v).expect("dimensions preserved")
    }
}

impl Planar for RasterImage {
    fn planar_dims(&self) -> (usize, usize) {
        self.dimensions()
    }
    fn planar_channels(&self) -> usize {
        3
    }
    fn to_planar(&self) -> Vec<f64> {
        self.data().iter().map(|v| *v as f64).collect()
    }
    fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Self {
        let d = data.iter().map(|v| v.clamp(0.0, 1.0) as f32).collect();
        RasterImage::from_raw_unchecked(width, height, d)
    }
}

/// Gaussian blur truncated at 3 sigma, with symmetric-reflect borders.
///
/// With `support`, a normalized masked convolution is computed: only active pixels
/// contribute and the weights are renormalized, so values outside the support
/// never leak in. Inactive pixels keep their input values.
pub fn gaussian_blur<T: Planar>(field: &T, sigma: f64, support: Option<&BinaryMask>) -> Result<T> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma must be positive, got {sigma}")));
    }
    let (w, h) = field.planar_dims();
    let ch = field.planar_channels();
    let kernel = gaussian_kernel(sigma);
    let input = field.to_planar();
    let Some(mask) = support else {
        return Ok(T::from_planar(w, h, convolve_separable(&input, w, h, ch, &kernel)));
    };
    if mask.dimensions() != (w, h) {
        return Err(Error::invalid("blur support mask dimensions differ from field"));
    }
    let weights: Vec<f64> = mask.data().iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let weighted: Vec<f64> = input
        .iter()
        .enumerate()
        .map(|(i, v)| v * weights[i / ch])
        .collect();
    let num = convolve_separable(&weighted, w, h, ch, &kernel);
    let den = convolve_separable(&weights, w, h, 1, &kernel);
    let out = input
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = i / ch;
            if mask.data()[p] && den[p] > 0.0 {
                num[i] / den[p]
            } else {
                *v
            }
        })
        .collect();
    Ok(T::from_planar(w, h, out))
}
