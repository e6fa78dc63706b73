use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::BinaryMask;

/// Per-pixel 2D displacement in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    data: Vec<Vec2>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, data: Vec<Vec2>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("field dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::invalid("field buffer length does not match dimensions"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field contains non-finite displacement"));
        }
        Ok(VectorField {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        VectorField {
            width,
            height,
            data: vec![Vec2::ZERO; width * height],
        }
    }

    pub fn constant(width: usize, height: usize, v: Vec2) -> Self {
        VectorField {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Vec2) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
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

    pub fn data(&self) -> &[Vec2] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Vec2 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: Vec2) {
        self.data[y * self.width + x] = v;
    }

    /// Bilinear interpolation with edge clamping.
    pub fn sample(&self, p: Vec2) -> Vec2 {
        let x = p.x.clamp(0.0, (self.width - 1) as f64);
        let y = p.y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn negated(&self) -> VectorField {
        VectorField {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| -*v).collect(),
        }
    }

    /// Zero every vector outside `support`.
    pub fn masked(&self, support: &BinaryMask) -> VectorField {
        assert_eq!(support.dimensions(), self.dimensions());
        VectorField {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(support.data())
                .map(|(v, m)| if *m { *v } else { Vec2::ZERO })
                .collect(),
        }
    }

    /// Bilinear resample to a new size; vectors are scaled by the size ratio.
    pub fn resize(&self, width: usize, height: usize) -> VectorField {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let p = Vec2::new((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5);
                let v = self.sample(p);
                data.push(Vec2::new(v.x / sx, v.y / sy));
            }
        }
        VectorField {
            width,
            height,
            data,
        }
    }
}

/// Per-pixel real values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::invalid("scalar field buffer does not match dimensions"));
        }
        Ok(ScalarField {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        ScalarField {
            width,
            height,
            data: vec![0.0; width * height],
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }
}
