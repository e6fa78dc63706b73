use nalgebra::{DMatrix, SymmetricEigen, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::VectorField;

use super::SparseFlow;

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const JITTER: f64 = 0.5;
const JITTER_SEED: u64 = 0x5eed;

/// Polynomial part of the interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyTerm {
    /// `a0 + a1 x + a2 y`.
    Affine,
    /// `a0` only: fewer than three anchors, or all anchors collinear.
    Constant,
}

/// `s(p) = sum_i w_i |p - p_i| + poly(p)`, solved for dx and dy together.
///
/// Positions are normalized (centred, scaled) before solving; `eval` takes
/// image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    centers: Vec<Vec2>,
    weights: Vec<Vec2>,
    /// Rows: constant, x, y (x and y left at zero for a constant term).
    affine: [Vec2; 3],
    poly: PolyTerm,
    origin: Vec2,
    scale: f64,
}

impl RbfModel {
    pub fn centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.centers.iter().map(|c| *c * self.scale + self.origin)
    }

    pub fn poly_term(&self) -> PolyTerm {
        self.poly
    }

    /// Affine coefficients as a 2x3 matrix `[dx; dy]` over `[1, x, y]` in image
    /// coordinates.
    pub fn affine_coefficients(&self) -> [[f64; 3]; 2] {
        let [c, ax, ay] = self.affine;
        let s = self.scale;
        let o = self.origin;
        let cx = c.x - (ax.x * o.x + ay.x * o.y) / s;
        let cy = c.y - (ax.y * o.x + ay.y * o.y) / s;
        [[cx, ax.x / s, ay.x / s], [cy, ax.y / s, ay.y / s]]
    }

    pub fn weights(&self) -> &[Vec2] {
        &self.weights
    }

    pub fn eval(&self, p: Vec2) -> Vec2 {
        let q = (p - self.origin) / self.scale;
        let mut acc = self.affine[0] + self.affine[1] * q.x + self.affine[2] * q.y;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            acc += *w * q.distance(*c);
        }
        acc
    }

    /// Evaluate at every pixel center.
    pub fn densify(&self, width: usize, height: usize) -> VectorField {
        let mut data = vec![Vec2::ZERO; width * height];
        data.par_chunks_mut(width.max(1)).enumerate().for_each(|(y, row)| {
            for (x, v) in row.iter_mut().enumerate() {
                *v = self.eval(Vec2::new(x as f64, y as f64));
            }
        });
        VectorField::new(width, height, data).expect("finite interpolant")
    }
}

fn is_collinear(points: &[Vec2]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec2::ZERO, |a, p| a + *p) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let eig = SymmetricEigen::new(Matrix2::new(sxx, sxy, sxy, syy)).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    hi <= 0.0 || lo <= 1e-10 * hi
}

fn has_duplicates(points: &[Vec2]) -> bool {
    points
        .iter()
        .enumerate()
        .any(|(i, p)| points[i + 1..].iter().any(|q| p.distance(*q) < 1e-9))
}

fn solve_system(points: &[Vec2], values: &[Vec2]) -> Result<RbfModel> {
    let n = points.len();
    let lo = points.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |a, p| Vec2::new(a.x.min(p.x), a.y.min(p.y)));
    let hi = points.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, p| Vec2::new(a.x.max(p.x), a.y.max(p.y)));
    let origin = (lo + hi) / 2.0;
    let scale = ((hi.x - lo.x).max(hi.y - lo.y) / 2.0).max(1.0);
    let centers: Vec<Vec2> = points.iter().map(|p| (*p - origin) / scale).collect();
    let poly = if is_collinear(points) { PolyTerm::Constant } else { PolyTerm::Affine };
    let m = match poly {
        PolyTerm::Affine => 3,
        PolyTerm::Constant => 1,
    };
    let size = n + m;
    let mut a = DMatrix::<f64>::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = centers[i].distance(centers[j]);
        }
        let row = [1.0, centers[i].x, centers[i].y];
        for k in 0..m {
            a[(i, n + k)] = row[k];
            a[(n + k, i)] = row[k];
        }
    }
    let mut b = DMatrix::<f64>::zeros(size, 2);
    for (i, v) in values.iter().enumerate() {
        b[(i, 0)] = v.x;
        b[(i, 1)] = v.y;
    }
    let lu = a.clone().lu();
    let mut x = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("interpolation matrix is singular".into()))?;
    let bnorm = b.norm().max(1e-300);
    let mut residual = (&b - &a * &x).norm() / bnorm;
    for _ in 0..3 {
        if residual <= RESIDUAL_TOLERANCE {
            break;
        }
        let r = &b - &a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        residual = (&b - &a * &x).norm() / bnorm;
    }
    if !residual.is_finite() || residual > RESIDUAL_TOLERANCE {
        return Err(Error::Singular(format!("interpolation residual {residual:.3e} above tolerance")));
    }
    let weights = (0..n).map(|i| Vec2::new(x[(i, 0)], x[(i, 1)])).collect();
    let mut affine = [Vec2::ZERO; 3];
    for (k, slot) in affine.iter_mut().enumerate().take(m) {
        *slot = Vec2::new(x[(n + k, 0)], x[(n + k, 1)]);
    }
    Ok(RbfModel { centers, weights, affine, poly, origin, scale })
}

/// Fit the `phi(r) = r` interpolant with an affine (or constant) term.
///
/// Duplicate anchors or a singular system trigger one retry with every anchor
/// displaced by 0.5 px in a seeded random direction.
pub fn rbf_fit(flow: &SparseFlow) -> Result<RbfModel> {
    let points: Vec<Vec2> = flow.anchors().iter().map(|a| a.position).collect();
    let values: Vec<Vec2> = flow.anchors().iter().map(|a| a.vector).collect();
    rbf_fit_points(&points, &values)
}

/// As [`rbf_fit`] on raw, possibly duplicated, samples.
pub fn rbf_fit_points(points: &[Vec2], values: &[Vec2]) -> Result<RbfModel> {
    if points.is_empty() {
        return Err(Error::invalid("cannot interpolate an empty flow"));
    }
    if points.len() != values.len() {
        return Err(Error::invalid("point and value counts differ"));
    }
    if points.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::invalid("interpolation samples must be finite"));
    }
    let first = if has_duplicates(points) {
        Err(Error::Singular("duplicate anchor positions".into()))
    } else {
        solve_system(points, values)
    };
    match first {
        Ok(m) => Ok(m),
        Err(Error::Singular(msg)) => {
            log::warn!("rbf solve failed ({msg}); retrying with jittered anchors");
            let mut rng = ChaCha8Rng::seed_from_u64(JITTER_SEED);
            let jittered: Vec<Vec2> = points
                .iter()
                .map(|p| *p + Vec2::from_degrees(rng.random_range(0.0..360.0)) * JITTER)
                .collect();
            if has_duplicates(&jittered) {
                return Err(Error::Singular("duplicate anchors after jitter".into()));
            }
            solve_system(&jittered, values)
        }
        Err(e) => Err(e),
    }
}

/// Dense field and model from a sparse flow.
pub fn rbf_densify(flow: &SparseFlow, width: usize, height: usize) -> Result<(VectorField, RbfModel)> {
    let model = rbf_fit(flow)?;
    Ok((model.densify(width, height), model))
}
