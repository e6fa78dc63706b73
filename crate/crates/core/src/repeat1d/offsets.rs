use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::repeat1d::MatchPath;

/// Displacement seeds along the sampled line.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSeedSet {
    /// Signed offsets `j - i`, one per retained path point (a multiset).
    pub offsets: Vec<i64>,
    /// `(position along the original line, offset)` for each retained point.
    pub positions: Vec<(usize, i64)>,
    /// Unit vector of the sampled line.
    pub direction: Vec2,
}

impl OffsetSeedSet {
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// +1 if non-negative offsets are at least as frequent as negative ones, else -1.
    pub fn dominant_sign(&self) -> f64 {
        let pos = self.offsets.iter().filter(|o| **o >= 0).count();
        if 2 * pos >= self.offsets.len() {
            1.0
        } else {
            -1.0
        }
    }

    /// Median of the offset magnitudes (lower median for even counts).
    pub fn median_magnitude(&self) -> Option<i64> {
        let mut m: Vec<i64> = self.offsets.iter().map(|o| o.abs()).collect();
        if m.is_empty() {
            return None;
        }
        m.sort_unstable();
        Some(m[(m.len() - 1) / 2])
    }

    /// Magnitude histogram: `(length, count)` sorted by descending count, then length.
    pub fn length_histogram(&self) -> Vec<(i64, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for o in &self.offsets {
            *counts.entry(o.abs()).or_insert(0usize) += 1;
        }
        let mut h: Vec<(i64, usize)> = counts.into_iter().collect();
        h.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        h
    }

    /// Offset magnitude at every position `0..n` of the line: the mean over the
    /// points at that position, gaps filled from the nearest covered position
    /// (lower position on ties).
    pub fn per_position(&self, n: usize) -> Vec<f64> {
        let mut sum = vec![0.0; n];
        let mut cnt = vec![0usize; n];
        for (p, o) in &self.positions {
            if *p < n {
                sum[*p] += o.abs() as f64;
                cnt[*p] += 1;
            }
        }
        let known: Vec<usize> = (0..n).filter(|p| cnt[*p] > 0).collect();
        if known.is_empty() {
            let m = self.median_magnitude().unwrap_or(0) as f64;
            return vec![m; n];
        }
        let mut out = vec![0.0; n];
        let mut k = 0;
        for (p, slot) in out.iter_mut().enumerate() {
            while k + 1 < known.len() && known[k + 1] <= p {
                k += 1;
            }
            let mut q = known[k];
            if q < p && k + 1 < known.len() && known[k + 1] - p < p - q {
                q = known[k + 1];
            }
            *slot = sum[q] / cnt[q] as f64;
        }
        out
    }
}

/// Offsets of the path points whose row index lies in the middle window
/// `[n/2, n/2 + n)` of the reflection-extended matrix, i.e. the points that cover
/// the original sequence once.
pub fn path_to_offsets(path: &MatchPath, n: usize, direction: Vec2) -> Result<OffsetSeedSet> {
    let start = n / 2;
    let end = start + n;
    let mut offsets = Vec::new();
    let mut positions = Vec::new();
    for (i, j) in &path.points {
        if *i >= start && *i < end {
            let o = *j as i64 - *i as i64;
            offsets.push(o);
            positions.push((*i - start, o));
        }
    }
    if offsets.is_empty() {
        return Err(Error::invalid("path has no points in the middle section"));
    }
    let direction = direction
        .normalized()
        .ok_or_else(|| Error::invalid("degenerate line direction"))?;
    Ok(OffsetSeedSet {
        offsets,
        positions,
        direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_offsets() {
        let n = 40;
        let points: Vec<(usize, usize)> = (0..60).map(|i| (i, i + 20)).collect();
        let path = MatchPath { points, total_cost: 0.0 };
        let s = path_to_offsets(&path, n, Vec2::new(1.0, 0.0)).unwrap();
        assert!(s.offsets.iter().all(|o| *o == 20));
        assert_eq!(s.offsets.len(), 40);
        assert_eq!(s.positions[0], (0, 20));
    }

    #[test]
    fn alternating_offsets_counted() {
        let points: Vec<(usize, usize)> = (0..70).flat_map(|k| [(k, k + 19), (k, k + 20)]).collect();
        let path = MatchPath { points, total_cost: 0.0 };
        path.validate(8).unwrap();
        let s = path_to_offsets(&path, 40, Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(s.offsets.iter().filter(|o| **o == 19).count(), 40);
        assert_eq!(s.offsets.iter().filter(|o| **o == 20).count(), 40);
        assert_eq!(s.offsets.len(), 80);
    }

    #[test]
    fn empty_middle_fails() {
        let path = MatchPath { points: vec![(0, 10), (1, 11)], total_cost: 0.0 };
        assert!(path_to_offsets(&path, 100, Vec2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn per_position_fills_gaps() {
        let s = OffsetSeedSet {
            offsets: vec![15, 25],
            positions: vec![(2, 15), (7, 25)],
            direction: Vec2::new(1.0, 0.0),
        };
        let p = s.per_position(10);
        assert_eq!(p, vec![15.0, 15.0, 15.0, 15.0, 15.0, 25.0, 25.0, 25.0, 25.0, 25.0]);
    }
}
