use crate::error::{Error, Result};
use crate::repeat1d::SelfSimMatrix;

/// A monotone, 8-connected path through the matrix with bounded slope.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPath {
    pub points: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl MatchPath {
    /// Check continuity, monotonicity, bounded slope and band avoidance.
    pub fn validate(&self, exclusion: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::invalid("empty path"));
        }
        for (i, j) in &self.points {
            if i.abs_diff(*j) <= exclusion {
                return Err(Error::invalid(format!("path enters excluded band at ({i}, {j})")));
            }
        }
        for w in self.points.windows(2) {
            let ((i0, j0), (i1, j1)) = (w[0], w[1]);
            if i1 < i0 || j1 < j0 || i1 - i0 > 1 || j1 - j0 > 1 || (i0, j0) == (i1, j1) {
                return Err(Error::invalid("path step is not a monotone 8-connected move"));
            }
        }
        for w in self.points.windows(3) {
            if w[0].0 == w[2].0 || w[0].1 == w[2].1 {
                return Err(Error::invalid("path stays on a row or column for more than two entries"));
            }
        }
        Ok(())
    }

    /// Signed offsets `j - i` of every point.
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        self.points.iter().map(|(i, j)| *j as i64 - *i as i64)
    }
}

const DIAG: usize = 0;
const DOWN: usize = 1;
const RIGHT: usize = 2;
const START: usize = 3;
const KINDS: usize = 4;
const NONE: u8 = u8::MAX;

/// Cheapest constrained path, computed by dynamic programming.
///
/// Paths start at the feasible cell nearest the top-left corner of either
/// triangle, `(0, e+1)` or `(e+1, 0)`, and end anywhere on the last column or last
/// row. Each cell keeps a separate cost per arrival move (diagonal, down, right) so
/// that two consecutive down or right moves are never chained. Ties prefer the
/// diagonal move, then down, then right, then lower raster index.
pub fn min_cost_path(matrix: &SelfSimMatrix) -> Result<MatchPath> {
    let n = matrix.len();
    solve(matrix, |i, j| i == n - 1 || j == n - 1)
}

/// Like [`min_cost_path`], but the path must run until its leading index (row
/// above the diagonal, column below it) reaches `end`. Every candidate then
/// covers the same span, so drifting to a larger offset to exit the matrix
/// early does not pay off.
pub fn min_cost_path_until(matrix: &SelfSimMatrix, end: usize) -> Result<MatchPath> {
    if end >= matrix.len() {
        return Err(Error::invalid("path end index outside the matrix"));
    }
    solve(matrix, |i, j| (j > i && i == end) || (i > j && j == end))
}

fn solve(matrix: &SelfSimMatrix, is_end: impl Fn(usize, usize) -> bool) -> Result<MatchPath> {
    let n = matrix.len();
    let e = matrix.exclusion();
    if n < e + 2 {
        return Err(Error::invalid("matrix too small for any feasible path"));
    }
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * KINDS + k;
    let mut cost = vec![f64::INFINITY; n * n * KINDS];
    let mut back = vec![NONE; n * n * KINDS];

    for (i, j) in [(0, e + 1), (e + 1, 0)] {
        cost[idx(i, j, START)] = matrix.value(i, j);
    }

    for i in 0..n {
        for j in 0..n {
            if matrix.is_excluded(i, j) {
                continue;
            }
            let d = matrix.value(i, j);
            if i > 0 && j > 0 {
                if let Some((c, k)) = relax(&cost, idx(i - 1, j - 1, 0), [true; KINDS], d) {
                    set(&mut cost, &mut back, idx(i, j, DIAG), c, k);
                }
            }
            if i > 0 {
                let mut allowed = [true; KINDS];
                allowed[DOWN] = false;
                if let Some((c, k)) = relax(&cost, idx(i - 1, j, 0), allowed, d) {
                    set(&mut cost, &mut back, idx(i, j, DOWN), c, k);
                }
            }
            if j > 0 {
                let mut allowed = [true; KINDS];
                allowed[RIGHT] = false;
                if let Some((c, k)) = relax(&cost, idx(i, j - 1, 0), allowed, d) {
                    set(&mut cost, &mut back, idx(i, j, RIGHT), c, k);
                }
            }
        }
    }

    let mut best: Option<(f64, usize, usize, usize)> = None;
    let ends = (0..n * n).map(|k| (k / n, k % n)).filter(|&(i, j)| is_end(i, j));
    for (i, j) in ends {
        for k in 0..KINDS {
            let c = cost[idx(i, j, k)];
            if !c.is_finite() {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, _, _, bk)) => c < bc || (c == bc && k < bk),
            };
            if better {
                best = Some((c, i, j, k));
            }
        }
    }
    let (total_cost, mut i, mut j, mut k) =
        best.ok_or_else(|| Error::invalid("no feasible path through the self-similarity matrix"))?;

    let mut points = vec![(i, j)];
    while k != START {
        let prev = back[idx(i, j, k)] as usize;
        match k {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            DOWN => i -= 1,
            RIGHT => j -= 1,
            _ => unreachable!(),
        }
        k = prev;
        points.push((i, j));
    }
    points.reverse();
    Ok(MatchPath { points, total_cost })
}

/// Cheapest allowed predecessor state at `base..base+KINDS`, plus the step cost.
#[inline]
fn relax(cost: &[f64], base: usize, allowed: [bool; KINDS], d: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for k in 0..KINDS {
        let c = cost[base + k];
        if allowed[k] && c.is_finite() && best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, k));
        }
    }
    best.map(|(c, k)| (c + d, k))
}

#[inline]
fn set(cost: &mut [f64], back: &mut [u8], at: usize, c: f64, k: usize) {
    cost[at] = c;
    back[at] = k as u8;
}
