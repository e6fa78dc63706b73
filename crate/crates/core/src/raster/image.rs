use crate::error::{Error, Result};
use crate::geom::Vec2;

/// An RGB image with channel values in [0, 1], stored row-major and interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RasterImage {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height * Self::CHANNELS {
            return Err(Error::invalid(format!(
                "image buffer has {} values, expected {}",
                data.len(),
                width * height * Self::CHANNELS
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "color value {v} outside [0, 1]"
            )));
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, color: [f32; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&color);
        }
        Self::new(width, height, data)
    }

    /// Build an image by evaluating `f(x, y)` per pixel; values are clamped to [0, 1].
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let c = f(x, y);
                data.extend(c.iter().map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        RasterImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Pixel lookup with edge clamping for signed coordinates.
    #[inline]
    pub fn pixel_clamped(&self, x: isize, y: isize) -> [f32; 3] {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.pixel(x, y)
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, c: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        for k in 0..3 {
            self.data[i + k] = c[k].clamp(0.0, 1.0);
        }
    }

    /// Rec. 601 luma, used where a single intensity channel is needed.
    pub fn luma(&self) -> Vec<f64> {
        self.data
            .chunks_exact(3)
            .map(|c| 0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64)
            .collect()
    }

    /// Bilinear interpolation of the four surrounding pixels; coordinates outside
    /// the image are clamped to the edge first.
    pub fn bilinear_sample(&self, p: Vec2) -> [f32; 3] {
        let x = p.x.clamp(0.0, (self.width - 1) as f64);
        let y = p.y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        if fx == 0.0 && fy == 0.0 {
            return self.pixel(x0, y0);
        }
        let a = self.pixel(x0, y0);
        let b = self.pixel(x1, y0);
        let c = self.pixel(x0, y1);
        let d = self.pixel(x1, y1);
        let mut out = [0.0f32; 3];
        for k in 0..3 {
            let top = a[k] as f64 * (1.0 - fx) + b[k] as f64 * fx;
            let bottom = c[k] as f64 * (1.0 - fx) + d[k] as f64 * fx;
            out[k] = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0) as f32;
        }
        out
    }

    /// Copy with `margin` pixels of replicated edge on every side.
    pub fn pad_replicate(&self, margin: usize) -> RasterImage {
        let w = self.width + 2 * margin;
        let h = self.height + 2 * margin;
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                let c = self.pixel_clamped(x as isize - margin as isize, y as isize - margin as isize);
                data.extend_from_slice(&c);
            }
        }
        RasterImage::from_raw_unchecked(w, h, data)
    }

    /// Sub-rectangle starting at (x0, y0).
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<RasterImage> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::invalid("crop rectangle outside image"));
        }
        let mut data = Vec::with_capacity(width * height * 3);
        for y in y0..y0 + height {
            let start = (y * self.width + x0) * 3;
            data.extend_from_slice(&self.data[start..start + width * 3]);
        }
        Ok(RasterImage::from_raw_unchecked(width, height, data))
    }

    /// Mean absolute difference over all channels.
    pub fn mean_abs_diff(&self, other: &RasterImage) -> f64 {
        assert_eq!(self.dimensions(), other.dimensions());
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a as f64 - *b as f64).abs())
            .sum();
        sum / self.data.len() as f64
    }

    /// Resize with box-filter averaging (downscaling) or bilinear interpolation (upscaling).
    pub fn resize(&self, width: usize, height: usize) -> Result<RasterImage> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("resize target must be at least 1x1"));
        }
        if (width, height) == self.dimensions() {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                if sx > 1.0 || sy > 1.0 {
                    let fx0 = x as f64 * sx;
                    let fy0 = y as f64 * sy;
                    let x0 = fx0.floor() as usize;
                    let y0 = fy0.floor() as usize;
                    let x1 = (((x + 1) as f64 * sx).ceil() as usize).clamp(x0 + 1, self.width);
                    let y1 = (((y + 1) as f64 * sy).ceil() as usize).clamp(y0 + 1, self.height);
                    let mut acc = [0.0f64; 3];
                    let mut count = 0.0;
                    for yy in y0..y1 {
                        for xx in x0..x1 {
                            let c = self.pixel(xx, yy);
                            for k in 0..3 {
                                acc[k] += c[k] as f64;
                            }
                            count += 1.0;
                        }
                    }
                    data.extend(acc.iter().map(|v| (v / count) as f32));
                } else {
                    let p = Vec2::new((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5);
                    data.extend_from_slice(&self.bilinear_sample(p));
                }
            }
        }
        Ok(RasterImage::from_raw_unchecked(width, height, data))
    }
}
