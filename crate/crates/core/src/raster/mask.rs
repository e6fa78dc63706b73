use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Connected-component labeling of a mask (8-connectivity), ids assigned in
/// raster-scan discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTable {
    labels: Vec<u32>,
    count: usize,
}

impl ComponentTable {
    const NONE: u32 = u32::MAX;

    pub fn count(&self) -> usize {
        self.count
    }

    /// Component id of the pixel at flat index `i`, `None` for inactive pixels.
    pub fn label(&self, i: usize) -> Option<usize> {
        match self.labels[i] {
            Self::NONE => None,
            l => Some(l as usize),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        (0..self.labels.len()).map(|i| self.label(i))
    }
}

/// Per-pixel boolean selection. Value true means "allowed to move".
#[derive(Debug, Clone)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
    components: OnceLock<ComponentTable>,
}

impl PartialEq for BinaryMask {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.data == other.data
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("mask dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "mask buffer has {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
            components: OnceLock::new(),
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Axis-aligned rectangle [x0, x1) x [y0, y1).
    pub fn rect(width: usize, height: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self> {
        Self::from_fn(width, height, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1)
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

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Signed lookup; anything outside the raster is inactive.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    /// Mask value at the pixel nearest to `p`.
    pub fn contains_point(&self, p: Vec2) -> bool {
        self.get_signed(p.x.round() as isize, p.y.round() as isize)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|v| *v)
    }

    /// Active pixel coordinates in raster order.
    pub fn active_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Inclusive bounding box (x0, y0, x1, y1) of the active pixels.
    pub fn bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.active_pixels() {
            b = Some(match b {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        b
    }

    pub fn centroid(&self) -> Option<Vec2> {
        let mut sum = Vec2::ZERO;
        let mut n = 0usize;
        for (x, y) in self.active_pixels() {
            sum += Vec2::new(x as f64, y as f64);
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// The active pixel closest to the centroid (the centroid itself may lie outside
    /// a non-convex mask). Ties go to the first pixel in raster order.
    pub fn central_pixel(&self) -> Option<(usize, usize)> {
        let c = self.centroid()?;
        let mut best: Option<((usize, usize), f64)> = None;
        for (x, y) in self.active_pixels() {
            let d = Vec2::new(x as f64, y as f64).distance(c);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some(((x, y), d));
            }
        }
        best.map(|(p, _)| p)
    }

    pub fn components(&self) -> &ComponentTable {
        self.components.get_or_init(|| connected_components(self))
    }

    /// Mask containing only component `id`.
    pub fn component_mask(&self, id: usize) -> BinaryMask {
        let table = self.components();
        let data = (0..self.data.len()).map(|i| table.label(i) == Some(id)).collect();
        BinaryMask::new(self.width, self.height, data).expect("same dimensions")
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect();
        BinaryMask::new(self.width, self.height, data)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a || *b).collect();
        BinaryMask::new(self.width, self.height, data)
    }

    fn check_same(&self, other: &BinaryMask) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::invalid("mask dimensions differ"));
        }
        Ok(())
    }

    /// Whether pixel (x, y) is active and has an inactive (or out-of-raster) 4-neighbor
    /// inside the raster.
    pub fn is_boundary(&self, x: usize, y: usize) -> bool {
        if !self.get(x, y) {
            return false;
        }
        let (x, y) = (x as isize, y as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            nx >= 0
                && ny >= 0
                && (nx as usize) < self.width
                && (ny as usize) < self.height
                && !self.get(nx as usize, ny as usize)
        })
    }

    /// Dilation by a Euclidean disk of the given radius.
    pub fn dilate(&self, radius: f64) -> BinaryMask {
        if radius <= 0.0 {
            return self.clone();
        }
        let r = radius.floor() as isize;
        let r2 = radius * radius;
        let offsets: Vec<(isize, isize)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|(dx, dy)| (dx * dx + dy * dy) as f64 <= r2)
            .collect();
        let mut out = self.data.clone();
        let (w, h) = (self.width as isize, self.height as isize);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.is_boundary(x, y) {
                    continue;
                }
                for (dx, dy) in &offsets {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h {
                        out[(ny * w + nx) as usize] = true;
                    }
                }
            }
        }
        BinaryMask::new(self.width, self.height, out).expect("same dimensions")
    }

    /// Transposed copy (x and y swapped).
    pub fn transposed(&self) -> BinaryMask {
        BinaryMask::from_fn(self.height, self.width, |x, y| self.get(y, x)).expect("valid dims")
    }

    /// Nearest-neighbor resample to a new size.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Result<BinaryMask> {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        BinaryMask::from_fn(width, height, |x, y| {
            let ox = (((x as f64 + 0.5) * sx) as usize).min(self.width - 1);
            let oy = (((y as f64 + 0.5) * sy) as usize).min(self.height - 1);
            self.get(ox, oy)
        })
    }
}

/// 8-connected component labeling; ids follow raster-scan discovery order.
pub fn connected_components(mask: &BinaryMask) -> ComponentTable {
    let (w, h) = mask.dimensions();
    let mut labels = vec![ComponentTable::NONE; w * h];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.data[start] || labels[start] != ComponentTable::NONE {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask.data[j] && labels[j] == ComponentTable::NONE {
                        labels[j] = count;
                        queue.push_back(j);
                    }
                }
            }
        }
        count += 1;
    }
    ComponentTable {
        labels,
        count: count as usize,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_mask_has_no_components() {
        let m = BinaryMask::empty(10, 10).unwrap();
        assert_eq!(m.components().count(), 0);
    }

    #[test]
    fn disjoint_rectangles() {
        let a = BinaryMask::rect(30, 20, 2, 2, 8, 8).unwrap();
        let b = BinaryMask::rect(30, 20, 15, 5, 25, 15).unwrap();
        let m = a.or(&b).unwrap();
        let t = m.components();
        assert_eq!(t.count(), 2);
        assert_eq!(t.label(2 * 30 + 2), Some(0));
        assert_eq!(t.label(5 * 30 + 15), Some(1));
        assert_eq!(t.label(0), None);
    }

    #[test]
    fn diagonal_touch_is_one_component() {
        let a = BinaryMask::rect(20, 20, 2, 2, 6, 6).unwrap();
        let b = BinaryMask::rect(20, 20, 6, 6, 10, 10).unwrap();
        let m = a.or(&b).unwrap();
        assert_eq!(m.components().count(), 1);
    }

    #[test]
    fn dilation_by_radius() {
        let m = BinaryMask::rect(21, 21, 10, 10, 11, 11).unwrap();
        let d = m.dilate(3.0);
        assert!(d.get(13, 10));
        assert!(d.get(10, 7));
        assert!(!d.get(13, 13));
        assert_eq!(d.count(), 29);
    }

    fn partition(m: &BinaryMask) -> Vec<Vec<usize>> {
        let t = m.components();
        let mut groups = vec![Vec::new(); t.count()];
        for (i, l) in t.labels().enumerate() {
            if let Some(l) = l {
                groups[l].push(i);
            }
        }
        groups
    }

    proptest! {
        #[test]
        fn components_invariant_under_transpose(bits in proptest::collection::vec(any::<bool>(), 7 * 9)) {
            let m = BinaryMask::new(7, 9, bits).unwrap();
            let t = m.transposed();
            // Map each transposed group back to original flat indices and compare as sets.
            let mut a: Vec<Vec<usize>> = partition(&m);
            let mut b: Vec<Vec<usize>> = partition(&t)
                .into_iter()
                .map(|g| {
                    let mut g: Vec<usize> = g.into_iter().map(|i| {
                        let (x, y) = (i % 9, i / 9);
                        x * 7 + y
                    }).collect();
                    g.sort();
                    g
                })
                .collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
