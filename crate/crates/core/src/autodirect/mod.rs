//! Direction suggestions from mutually-nearest corner descriptors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{squared_distance, DescriptorField};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{gaussian_blur, RasterImage, ScalarField};

pub const DEFAULT_CORNER_COUNT: usize = 200;
pub const CORNER_SPACING: f64 = 8.0;
pub const TENSOR_SIGMA: f64 = 1.5;
const QUALITY_LEVEL: f64 = 0.01;
const MIN_SCORE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub x: usize,
    pub y: usize,
    pub score: f64,
}

impl Corner {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }
}

/// Corners by descending score, pairwise at least 8 px apart.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub points: Vec<Corner>,
}

/// Minimum eigenvalue of the Gaussian-windowed structure tensor.
pub fn corner_response(image: &RasterImage) -> Result<ScalarField> {
    let (w, h) = image.dimensions();
    let l = image.luma();
    let at = |x: isize, y: isize| l[(y.clamp(0, h as isize - 1) as usize) * w + x.clamp(0, w as isize - 1) as usize];
    let mut ixx = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            let gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
            let i = y as usize * w + x as usize;
            ixx[i] = gx * gx;
            ixy[i] = gx * gy;
            iyy[i] = gy * gy;
        }
    }
    let a = gaussian_blur(&ScalarField::new(w, h, ixx)?, TENSOR_SIGMA, None)?;
    let b = gaussian_blur(&ScalarField::new(w, h, ixy)?, TENSOR_SIGMA, None)?;
    let c = gaussian_blur(&ScalarField::new(w, h, iyy)?, TENSOR_SIGMA, None)?;
    let score = a
        .data()
        .iter()
        .zip(b.data())
        .zip(c.data())
        .map(|((a, b), c)| {
            let half_tr = (a + c) / 2.0;
            let disc = (((a - c) / 2.0).powi(2) + b * b).sqrt();
            (half_tr - disc).max(0.0)
        })
        .collect();
    ScalarField::new(w, h, score)
}

/// Greedy selection by score (raster order on ties) with an 8 px exclusion
/// radius, keeping candidates above 1% of the best response.
pub fn detect_corners(image: &RasterImage, n: usize) -> Result<CornerSet> {
    if n == 0 {
        return Err(Error::invalid("corner count must be at least 1"));
    }
    let resp = corner_response(image)?;
    let (w, _) = resp.dimensions();
    let max = resp.data().iter().copied().fold(0.0, f64::max);
    if max <= MIN_SCORE {
        return Ok(CornerSet::default());
    }
    let floor = QUALITY_LEVEL * max;
    let mut cand: Vec<Corner> = resp
        .data()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= floor && **s > MIN_SCORE)
        .map(|(i, s)| Corner { x: i % w, y: i / w, score: *s })
        .collect();
    cand.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.y, a.x).cmp(&(b.y, b.x))));
    let mut points: Vec<Corner> = Vec::new();
    for c in cand {
        if points.len() == n {
            break;
        }
        if points.iter().all(|p| p.position().distance(c.position()) >= CORNER_SPACING) {
            points.push(c);
        }
    }
    Ok(CornerSet { points })
}

/// Mutual nearest neighbours in descriptor space (lowest index on ties), each
/// unordered pair once as `(i, j)` with `i < j`.
pub fn best_buddies(corners: &CornerSet, descriptors: &DescriptorField) -> Result<Vec<(usize, usize)>> {
    let n = corners.points.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    if corners
        .points
        .iter()
        .any(|c| c.x >= descriptors.width() || c.y >= descriptors.height())
    {
        return Err(Error::invalid("corner outside the descriptor field"));
    }
    let desc: Vec<&[f32]> = corners.points.iter().map(|c| descriptors.at(c.x, c.y)).collect();
    let nn: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = usize::MAX;
            let mut bd = f64::INFINITY;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = squared_distance(desc[i], desc[j]);
                if d < bd {
                    bd = d;
                    best = j;
                }
            }
            best
        })
        .collect();
    Ok((0..n).filter(|&i| nn[i] > i && nn[nn[i]] == i).map(|i| (i, nn[i])).collect())
}

pub const BIN_COUNT: usize = 18;
pub const BIN_WIDTH_DEG: f64 = 10.0;
pub const MIN_VOTES: f64 = 3.0;
pub const DEFAULT_MAX_DIRECTIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuggestedDirection {
    /// Unit vector with positive x (positive y when x is zero).
    pub direction: Vec2,
    pub angle_deg: f64,
    pub votes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionVote {
    pub offsets: Vec<Vec2>,
    /// Smeared vote counts before any suppression; bin `k` is centred on `10k` degrees.
    pub histogram: Vec<f64>,
    pub winners: Vec<SuggestedDirection>,
}

/// Offset angle folded into [0, 180) degrees.
pub fn folded_angle_deg(v: Vec2) -> f64 {
    let a = v.y.atan2(v.x).to_degrees().rem_euclid(180.0);
    if a >= 180.0 {
        0.0
    } else {
        a
    }
}

fn bin_of(v: Vec2) -> usize {
    ((folded_angle_deg(v) / BIN_WIDTH_DEG).round() as usize) % BIN_COUNT
}

fn representative(angle_deg: f64) -> Vec2 {
    // Bin centres lie in [0, 180): positive y, or positive x at 0 / 90 degrees.
    let v = Vec2::from_degrees(angle_deg);
    let v = Vec2::new(if v.x.abs() < 1e-12 { 0.0 } else { v.x }, if v.y.abs() < 1e-12 { 0.0 } else { v.y });
    if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
        -v
    } else {
        v
    }
}

/// Histogram voting over pair offsets. The best bin always yields a direction
/// (none if there are no offsets); later rounds need at least three (smeared) votes.
pub fn vote_directions(offsets: &[Vec2], max_dirs: usize) -> Result<DirectionVote> {
    let offsets: Vec<Vec2> = offsets.iter().copied().filter(|v| v.norm() > 0.0).collect();
    let mut hist = vec![0.0; BIN_COUNT];
    for v in &offsets {
        let b = bin_of(*v);
        hist[b] += 1.0;
        hist[(b + 1) % BIN_COUNT] += 0.5;
        hist[(b + BIN_COUNT - 1) % BIN_COUNT] += 0.5;
    }
    let mut work = hist.clone();
    let mut winners = Vec::new();
    while winners.len() < max_dirs {
        let mut best = 0;
        for (i, v) in work.iter().enumerate() {
            if *v > work[best] {
                best = i;
            }
        }
        let votes = work[best];
        if votes <= 0.0 || (!winners.is_empty() && votes < MIN_VOTES) {
            break;
        }
        let angle = best as f64 * BIN_WIDTH_DEG;
        let direction = representative(angle);
        winners.push(SuggestedDirection {
            direction,
            angle_deg: direction.angle().to_degrees(),
            votes,
        });
        for d in [BIN_COUNT - 1, 0, 1] {
            work[(best + d) % BIN_COUNT] = 0.0;
        }
    }
    Ok(DirectionVote { offsets, histogram: hist, winners })
}

/// Corners, best-buddy pairs and votes for one image.
pub fn suggest_directions(
    image: &RasterImage,
    descriptors: &DescriptorField,
    corner_count: usize,
    max_dirs: usize,
) -> Result<DirectionVote> {
    let corners = detect_corners(image, corner_count)?;
    let pairs = best_buddies(&corners, descriptors)?;
    let offsets: Vec<Vec2> = pairs
        .iter()
        .map(|&(i, j)| corners.points[j].position() - corners.points[i].position())
        .collect();
    vote_directions(&offsets, max_dirs)
}
