use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{BinaryMask, RasterImage, VectorField};

use super::inpaint::{inpaint_fmm, DEFAULT_INPAINT_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Inpainted,
    WarpBlended,
}

/// The input padded by `margin` on every side, with everything outside the
/// support filled in so warps can sample beyond the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTexture {
    pub canvas: RasterImage,
    pub margin: usize,
    pub provenance: Vec<Provenance>,
    /// The unpadded input; pixels with zero displacement are copied from here.
    pub source: RasterImage,
}

impl ExtendedTexture {
    /// Texture with no extension at all (nothing outside the image is needed).
    pub fn passthrough(image: &RasterImage) -> Self {
        let (w, h) = image.dimensions();
        ExtendedTexture {
            canvas: image.clone(),
            margin: 0,
            provenance: vec![Provenance::Original; w * h],
            source: image.clone(),
        }
    }

    /// Sample in image coordinates.
    pub fn sample(&self, p: Vec2) -> [f32; 3] {
        let m = self.margin as f64;
        self.canvas.bilinear_sample(Vec2::new(p.x + m, p.y + m))
    }
}

pub const MARGIN_SLACK: usize = 8;
pub const POISSON_TOLERANCE: f64 = 1e-4;
pub const POISSON_MAX_ITERATIONS: usize = 2000;
const MAX_CHAIN_STEPS: usize = 64;
const SOR_OMEGA: f64 = 1.8;

/// `ceil(max |F|) + 8` over the support.
pub fn default_margin(support: &BinaryMask, fields: &[&VectorField]) -> usize {
    let mut m: f64 = 0.0;
    for f in fields {
        for (x, y) in support.active_pixels() {
            m = m.max(f.get(x, y).norm());
        }
    }
    m.ceil() as usize + MARGIN_SLACK
}

/// Follow `p -> p + F(p)` until the point lands in the support; returns the
/// landing point and the number of steps.
fn chain_into_support(p: Vec2, field: &VectorField, support: &BinaryMask) -> Option<(Vec2, usize)> {
    let mut x = p;
    for step in 1..=MAX_CHAIN_STEPS {
        let v = field.sample(x);
        if v.norm() < 0.5 {
            return None;
        }
        x += v;
        if support.contains_point(x) {
            return Some((x, step));
        }
    }
    None
}

/// Pad, warp support content outwards along both fields into a band of width
/// `margin`, inpaint the rest, and Poisson-blend the warped band against the
/// inpainted surroundings.
///
/// `f1` and `f2` are the dense (unclipped) fields; `margin = None` uses
/// [`default_margin`].
pub fn extend_texture(
    image: &RasterImage,
    support: &BinaryMask,
    f1: &VectorField,
    f2: &VectorField,
    margin: Option<usize>,
) -> Result<ExtendedTexture> {
    let (w, h) = image.dimensions();
    if support.dimensions() != (w, h) || f1.dimensions() != (w, h) || f2.dimensions() != (w, h) {
        return Err(Error::invalid("image, support and fields must share dimensions"));
    }
    let m = margin.unwrap_or_else(|| default_margin(support, &[f1, f2]));
    let mut canvas = image.pad_replicate(m);
    let (cw, ch) = canvas.dimensions();
    let mut provenance = vec![Provenance::Inpainted; cw * ch];
    if support.is_empty() {
        for y in 0..h {
            for x in 0..w {
                provenance[(y + m) * cw + x + m] = Provenance::Original;
            }
        }
        return Ok(ExtendedTexture { canvas, margin: m, provenance, source: image.clone() });
    }

    let mut known = vec![false; cw * ch];
    for (x, y) in support.active_pixels() {
        let i = (y + m) * cw + x + m;
        known[i] = true;
        provenance[i] = Provenance::Original;
    }
    let band = BinaryMask::new(cw, ch, known.clone())?.dilate(m as f64);

    // Warp support content outwards.
    let mut warped = vec![false; cw * ch];
    let mut guide = canvas.clone();
    for cy in 0..ch {
        for cx in 0..cw {
            let i = cy * cw + cx;
            if known[i] || !band.get(cx, cy) {
                continue;
            }
            let p = Vec2::new(cx as f64 - m as f64, cy as f64 - m as f64);
            let a = chain_into_support(p, f1, support);
            let b = chain_into_support(p, f2, support);
            let hit = match (a, b) {
                (Some(a), Some(b)) => Some(if b.1 < a.1 { b.0 } else { a.0 }),
                (a, b) => a.or(b).map(|h| h.0),
            };
            if let Some(q) = hit {
                guide.set_pixel(cx, cy, image.bilinear_sample(q));
                warped[i] = true;
            }
        }
    }

    // Inpaint what the warp could not reach, seeded by both the support and
    // the warped band so the blend boundary agrees with the band.
    for i in 0..cw * ch {
        if warped[i] {
            canvas.set_pixel(i % cw, i / cw, guide.pixel(i % cw, i / cw));
        }
    }
    let seeds: Vec<bool> = known.iter().zip(&warped).map(|(k, w)| *k || *w).collect();
    inpaint_fmm(&mut canvas, &seeds, DEFAULT_INPAINT_RADIUS);

    let defined: Vec<bool> = seeds.clone();
    poisson_blend(&mut canvas, &warped, &guide, &defined, POISSON_TOLERANCE, POISSON_MAX_ITERATIONS);
    for (p, wv) in provenance.iter_mut().zip(&warped) {
        if *wv {
            *p = Provenance::WarpBlended;
        }
    }
    // The support must be bit-exact.
    for (x, y) in support.active_pixels() {
        canvas.set_pixel(x + m, y + m, image.pixel(x, y));
    }
    Ok(ExtendedTexture { canvas, margin: m, provenance, source: image.clone() })
}

/// Gauss-Seidel (over-relaxed) solve of `lap f = div v` on `region`, with
/// `f = dest` outside it. The guidance `v_pq = g_p - g_q` wherever `q` has a
/// defined guidance value, zero otherwise. Returns (iterations, final residual).
pub fn poisson_blend(
    dest: &mut RasterImage,
    region: &[bool],
    guide: &RasterImage,
    defined: &[bool],
    tolerance: f64,
    max_iterations: usize,
) -> (usize, f64) {
    let (w, h) = dest.dimensions();
    let cells: Vec<usize> = (0..w * h).filter(|i| region[*i]).collect();
    if cells.is_empty() {
        return (0, 0.0);
    }
    let mut f: Vec<[f64; 3]> = (0..w * h)
        .map(|i| {
            let c = dest.pixel(i % w, i / w);
            [c[0] as f64, c[1] as f64, c[2] as f64]
        })
        .collect();
    let g = |i: usize| {
        let c = guide.pixel(i % w, i / w);
        [c[0] as f64, c[1] as f64, c[2] as f64]
    };
    // Per cell: neighbour list and the constant guidance sum.
    let prepared: Vec<(usize, Vec<usize>, [f64; 3])> = cells
        .iter()
        .map(|&i| {
            let (x, y) = (i % w, i / w);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(i - 1);
            }
            if x + 1 < w {
                nb.push(i + 1);
            }
            if y > 0 {
                nb.push(i - w);
            }
            if y + 1 < h {
                nb.push(i + w);
            }
            let gp = g(i);
            let mut div = [0.0; 3];
            for &q in &nb {
                if defined[q] || region[q] {
                    let gq = g(q);
                    for k in 0..3 {
                        div[k] += gp[k] - gq[k];
                    }
                }
            }
            (i, nb, div)
        })
        .collect();
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < max_iterations {
        iterations += 1;
        residual = 0.0;
        for (i, nb, div) in &prepared {
            let n = nb.len() as f64;
            let mut s = *div;
            for &q in nb {
                for k in 0..3 {
                    s[k] += f[q][k];
                }
            }
            for k in 0..3 {
                let target = s[k] / n;
                let r = target - f[*i][k];
                residual = residual.max(r.abs());
                f[*i][k] += SOR_OMEGA * r;
            }
        }
        if residual <= tolerance {
            break;
        }
    }
    for &i in &cells {
        let c = f[i];
        dest.set_pixel(
            i % w,
            i / w,
            [c[0].clamp(0.0, 1.0) as f32, c[1].clamp(0.0, 1.0) as f32, c[2].clamp(0.0, 1.0) as f32],
        );
    }
    log::debug!("poisson blend: {iterations} iterations, residual {residual:.2e}");
    (iterations, residual)
}
