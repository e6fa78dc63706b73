use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::RasterImage;

/// Columns sampled along a line through an image; each column holds `band_width`
/// RGB samples taken perpendicular to the line, channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSlice {
    data: Vec<f64>,
    len: usize,
    column_len: usize,
    pub band_width: usize,
    pub step: f64,
    pub origin: Vec2,
    pub direction: Vec2,
}

impl BandSlice {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn column_len(&self) -> usize {
        self.column_len
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.column_len..(i + 1) * self.column_len]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.column_len)
    }

    /// Image-space position of column `i` on the sampled line.
    pub fn position(&self, i: usize) -> Vec2 {
        self.origin + self.direction * (i as f64 * self.step)
    }

    /// Build directly from column vectors (all must have equal length).
    pub fn from_columns(columns: Vec<Vec<f64>>, origin: Vec2, direction: Vec2) -> Result<Self> {
        let column_len = columns.first().map(|c| c.len()).unwrap_or(0);
        if column_len == 0 {
            return Err(Error::invalid("band slice needs non-empty columns"));
        }
        if columns.iter().any(|c| c.len() != column_len) {
            return Err(Error::invalid("band slice columns differ in length"));
        }
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::invalid("degenerate band direction"))?;
        let len = columns.len();
        Ok(BandSlice {
            data: columns.into_iter().flatten().collect(),
            len,
            column_len,
            band_width: column_len / 3,
            step: 1.0,
            origin,
            direction,
        })
    }
}

/// Sample `length` columns at unit spacing starting from `origin` along `direction`.
///
/// Band sample `k` of every column sits at offset `k - (band_width - 1) / 2` along
/// the quarter-turned direction. Samples falling outside the image clamp to the edge.
pub fn sample_band(
    image: &RasterImage,
    origin: Vec2,
    direction: Vec2,
    length: usize,
    band_width: usize,
) -> Result<BandSlice> {
    if length < 1 {
        return Err(Error::invalid("band length must be at least 1"));
    }
    if band_width == 0 || band_width.is_multiple_of(2) {
        return Err(Error::invalid(format!("band width must be odd and >= 1, got {band_width}")));
    }
    if direction.norm() < 1e-6 {
        return Err(Error::invalid("degenerate band direction"));
    }
    let d = direction / direction.norm();
    let n = d.perp();
    let half = (band_width as isize - 1) / 2;
    let column_len = band_width * 3;
    let mut data = Vec::with_capacity(length * column_len);
    for i in 0..length {
        let center = origin + d * i as f64;
        for k in -half..=half {
            let c = image.bilinear_sample(center + n * k as f64);
            data.extend(c.iter().map(|v| *v as f64));
        }
    }
    Ok(BandSlice {
        data,
        len: length,
        column_len,
        band_width,
        step: 1.0,
        origin,
        direction: d,
    })
}
