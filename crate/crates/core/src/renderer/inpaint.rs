//! Fast-marching inpainting: unknown pixels are filled in order of increasing
//! distance from the known region, each from a weighted average of known pixels
//! within a small radius.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::raster::RasterImage;

pub const DEFAULT_INPAINT_RADIUS: f64 = 5.0;
/// Width (px) of the directional weight across the front normal.
const DIRECTION_SPREAD: f64 = 0.3;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flag {
    Known,
    Band,
    Inside,
}

#[derive(PartialEq)]
struct Item {
    t: f64,
    idx: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on t, then on index.
        other.t.total_cmp(&self.t).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fill every pixel with `known[i] == false`. Does nothing if no pixel is known.
pub fn inpaint_fmm(image: &mut RasterImage, known: &[bool], radius: f64) {
    let (w, h) = image.dimensions();
    assert_eq!(known.len(), w * h);
    if !known.iter().any(|k| *k) || known.iter().all(|k| *k) {
        return;
    }
    let mut flag: Vec<Flag> = known.iter().map(|k| if *k { Flag::Known } else { Flag::Inside }).collect();
    let mut t = vec![f64::INFINITY; w * h];
    let mut heap = BinaryHeap::new();
    for i in 0..w * h {
        if flag[i] == Flag::Known {
            t[i] = 0.0;
        }
    }
    for i in 0..w * h {
        if flag[i] != Flag::Known {
            continue;
        }
        let (x, y) = (i % w, i / w);
        for n in neighbors(x, y, w, h) {
            if flag[n] == Flag::Known {
                continue;
            }
            // Known pixels adjacent to the hole seed the front.
            heap.push(Item { t: 0.0, idx: i });
            break;
        }
    }
    let r = radius.ceil() as isize;
    while let Some(Item { idx, .. }) = heap.pop() {
        if flag[idx] == Flag::Band {
            flag[idx] = Flag::Known;
        }
        let (x, y) = (idx % w, idx / w);
        for n in neighbors(x, y, w, h) {
            if flag[n] != Flag::Inside {
                continue;
            }
            let (nx, ny) = (n % w, n / w);
            let tn = solve_eikonal(&t, &flag, nx, ny, w, h);
            t[n] = tn;
            flag[n] = Flag::Band;
            fill_pixel(image, &flag, &t, nx, ny, r, radius);
            heap.push(Item { t: tn, idx: n });
        }
    }
}

fn neighbors(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let mut out = [usize::MAX; 4];
    if x > 0 {
        out[0] = y * w + x - 1;
    }
    if x + 1 < w {
        out[1] = y * w + x + 1;
    }
    if y > 0 {
        out[2] = (y - 1) * w + x;
    }
    if y + 1 < h {
        out[3] = (y + 1) * w + x;
    }
    out.into_iter().filter(|i| *i != usize::MAX)
}

fn t_at(t: &[f64], flag: &[Flag], x: isize, y: isize, w: usize, h: usize) -> f64 {
    if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
        return f64::INFINITY;
    }
    let i = y as usize * w + x as usize;
    if flag[i] == Flag::Inside {
        f64::INFINITY
    } else {
        t[i]
    }
}

fn solve_pair(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi.is_infinite() {
        return lo + 1.0;
    }
    let d = 2.0 - (a - b) * (a - b);
    if d > 0.0 {
        let s = (a + b + d.sqrt()) / 2.0;
        if s >= hi {
            return s;
        }
    }
    lo + 1.0
}

fn solve_eikonal(t: &[f64], flag: &[Flag], x: usize, y: usize, w: usize, h: usize) -> f64 {
    let (x, y) = (x as isize, y as isize);
    let tx = t_at(t, flag, x - 1, y, w, h).min(t_at(t, flag, x + 1, y, w, h));
    let ty = t_at(t, flag, x, y - 1, w, h).min(t_at(t, flag, x, y + 1, w, h));
    solve_pair(tx, ty)
}

fn grad_t(t: &[f64], flag: &[Flag], x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
    let (xi, yi) = (x as isize, y as isize);
    let c = t[y * w + x];
    let diff = |a: f64, b: f64| -> f64 {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => (b - a) / 2.0,
            (true, false) => c - a,
            (false, true) => b - c,
            _ => 0.0,
        }
    };
    let gx = diff(t_at(t, flag, xi - 1, yi, w, h), t_at(t, flag, xi + 1, yi, w, h));
    let gy = diff(t_at(t, flag, xi, yi - 1, w, h), t_at(t, flag, xi, yi + 1, w, h));
    (gx, gy)
}

fn fill_pixel(image: &mut RasterImage, flag: &[Flag], t: &[f64], x: usize, y: usize, r: isize, radius: f64) {
    let (w, h) = image.dimensions();
    let (gx, gy) = grad_t(t, flag, x, y, w, h);
    let gnorm = (gx * gx + gy * gy).sqrt();
    let tc = t[y * w + x];
    let mut acc = [0.0f64; 3];
    let mut wsum = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let (qx, qy) = (x as isize + dx, y as isize + dy);
            if qx < 0 || qy < 0 || qx as usize >= w || qy as usize >= h || (dx == 0 && dy == 0) {
                continue;
            }
            let q = qy as usize * w + qx as usize;
            if flag[q] == Flag::Inside {
                continue;
            }
            let d2 = (dx * dx + dy * dy) as f64;
            if d2 > radius * radius {
                continue;
            }
            // Offset from the neighbour to the pixel being filled.
            let (vx, vy) = (-dx as f64, -dy as f64);
            // Favour neighbours lying on the front normal through the pixel.
            let dir = if gnorm > 0.0 {
                let perp = (vx * gy - vy * gx) / gnorm;
                (-perp * perp / (2.0 * DIRECTION_SPREAD * DIRECTION_SPREAD)).exp().max(1e-12)
            } else {
                1.0
            };
            let dst = 1.0 / d2;
            let lev = 1.0 / (1.0 + (t[q] - tc).abs());
            let wgt = dir * dst * lev;
            let c = image.pixel(qx as usize, qy as usize);
            for k in 0..3 {
                acc[k] += wgt * c[k] as f64;
            }
            wsum += wgt;
        }
    }
    if wsum > 0.0 {
        let c = [(acc[0] / wsum) as f32, (acc[1] / wsum) as f32, (acc[2] / wsum) as f32];
        image.set_pixel(x, y, c);
    }
}
