use crate::descriptor::{par_rows, DescriptorField};
use crate::error::{Error, Result};
use crate::raster::{reflect_index, RasterImage};

pub const PATCH_DEFAULT_RADIUS: usize = 3;

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Patch descriptor: (2r+1)^2 RGB samples followed by Sobel x/y per channel, the
/// whole vector scaled to unit length. Borders reflect.
pub(crate) fn patch_descriptors(image: &RasterImage, radius: usize) -> Result<DescriptorField> {
    if radius < 1 {
        return Err(Error::invalid("patch radius must be at least 1"));
    }
    let (w, h) = image.dimensions();
    let side = 2 * radius + 1;
    let dim = side * side * 3 + 6;
    let r = radius as isize;
    let fetch = |x: isize, y: isize| image.pixel(reflect_index(x, w), reflect_index(y, h));

    let data = par_rows(h, w * dim, |y, row| {
        let mut v = vec![0.0f64; dim];
        for x in 0..w {
            let (xi, yi) = (x as isize, y as isize);
            let mut k = 0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let c = fetch(xi + dx, yi + dy);
                    for ch in c {
                        v[k] = ch as f64;
                        k += 1;
                    }
                }
            }
            let mut gx = [0.0f64; 3];
            let mut gy = [0.0f64; 3];
            for (j, dy) in (-1..=1).enumerate() {
                for (i, dx) in (-1..=1).enumerate() {
                    let c = fetch(xi + dx, yi + dy);
                    for ch in 0..3 {
                        gx[ch] += SOBEL_X[j][i] * c[ch] as f64;
                        gy[ch] += SOBEL_Y[j][i] * c[ch] as f64;
                    }
                }
            }
            for ch in 0..3 {
                v[k] = gx[ch];
                v[k + 1] = gy[ch];
                k += 2;
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let out = &mut row[x * dim..(x + 1) * dim];
            if norm > 0.0 {
                for (o, a) in out.iter_mut().zip(&v) {
                    *o = (a / norm) as f32;
                }
            }
        }
    });
    DescriptorField::new(w, h, dim, data)
}
