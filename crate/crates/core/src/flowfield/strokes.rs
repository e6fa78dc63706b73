use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::BinaryMask;

/// A user-drawn guide polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct DirectionStroke {
    points: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for DirectionStroke {
    type Error = Error;

    fn try_from(points: Vec<Vec2>) -> Result<Self> {
        DirectionStroke::new(points)
    }
}

impl From<DirectionStroke> for Vec<Vec2> {
    fn from(s: DirectionStroke) -> Self {
        s.points
    }
}

/// Straight piece of a stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeSegment {
    pub midpoint: Vec2,
    pub direction: Vec2,
    pub length: f64,
}

pub const BEND_THRESHOLD_DEG: f64 = 20.0;

impl DirectionStroke {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a stroke needs at least two points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("stroke points must be finite"));
        }
        if points.windows(2).any(|w| w[0].distance(w[1]) < 1e-9) {
            return Err(Error::invalid("consecutive stroke points must be distinct"));
        }
        Ok(DirectionStroke { points })
    }

    /// Straight line from `a` to `b`.
    pub fn line(a: Vec2, b: Vec2) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Runs of polyline edges that stay within the bend threshold of the run's
    /// first edge, each reduced to its chord.
    pub fn segments(&self) -> Vec<StrokeSegment> {
        let cos_limit = BEND_THRESHOLD_DEG.to_radians().cos();
        let dir = |i: usize| (self.points[i + 1] - self.points[i]).normalized().expect("distinct points");
        let mut out = Vec::new();
        let mut start = 0;
        let mut run_dir = dir(0);
        for i in 1..self.points.len() - 1 {
            let d = dir(i);
            if d.dot(run_dir) < cos_limit {
                out.push(chord(self.points[start], self.points[i]));
                start = i;
                run_dir = d;
            }
        }
        out.push(chord(self.points[start], *self.points.last().expect("non-empty")));
        out
    }
}

fn chord(a: Vec2, b: Vec2) -> StrokeSegment {
    let d = b - a;
    StrokeSegment {
        midpoint: (a + b) / 2.0,
        direction: d.normalized().expect("distinct chord ends"),
        length: d.norm(),
    }
}

/// Part of the mask solved with one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub mask: BinaryMask,
    pub direction: Vec2,
    pub origin: Vec2,
}

/// Voronoi split of the mask around the stroke segments' midpoints (ties to the
/// earlier site); empty cells are dropped.
pub fn split_by_strokes(mask: &BinaryMask, strokes: &[DirectionStroke]) -> Result<Vec<Cell>> {
    if strokes.is_empty() {
        return Err(Error::invalid("at least one stroke is required"));
    }
    let sites: Vec<StrokeSegment> = strokes.iter().flat_map(|s| s.segments()).collect();
    let (w, h) = mask.dimensions();
    let mut cells = vec![vec![false; w * h]; sites.len()];
    for (x, y) in mask.active_pixels() {
        let p = Vec2::new(x as f64, y as f64);
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, s) in sites.iter().enumerate() {
            let d = p.distance(s.midpoint);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        cells[best][y * w + x] = true;
    }
    let mut out = Vec::new();
    for (data, site) in cells.into_iter().zip(&sites) {
        if data.iter().any(|v| *v) {
            out.push(Cell {
                mask: BinaryMask::new(w, h, data)?,
                direction: site.direction,
                origin: site.midpoint,
            });
        }
    }
    Ok(out)
}
