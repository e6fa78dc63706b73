use crate::error::{Error, Result};
use crate::raster::BandSlice;

/// Pairwise column distances with the near-diagonal band excluded.
///
/// Raw distances are kept for every pair, so re-indexing (reflection) can apply
/// the band rule to the new indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimMatrix {
    n: usize,
    exclusion: usize,
    dist: Vec<f64>,
    sentinel: f64,
}

impl SelfSimMatrix {
    /// Build from a full symmetric table of raw distances (`n*n`, row-major).
    pub fn from_distances(n: usize, exclusion: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::invalid("distance table does not match matrix size"));
        }
        if n < 2 * exclusion + 2 {
            return Err(Error::invalid(format!(
                "sequence of {n} columns too short for exclusion band {exclusion} (need {})",
                2 * exclusion + 2
            )));
        }
        if dist.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("distances must be finite and nonnegative"));
        }
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > exclusion {
                    max = max.max(dist[i * n + j]);
                }
            }
        }
        // larger than any feasible path sum (paths have fewer than 2n points)
        let sentinel = 2.0 * n as f64 * max + 1.0;
        Ok(SelfSimMatrix {
            n,
            exclusion,
            dist,
            sentinel,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn exclusion(&self) -> usize {
        self.exclusion
    }

    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    #[inline]
    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        i.abs_diff(j) <= self.exclusion
    }

    /// Matrix entry: the column distance, or the sentinel inside the band.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.is_excluded(i, j) {
            self.sentinel
        } else {
            self.dist[i * self.n + j]
        }
    }

    /// Distance regardless of the band.
    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Largest off-band entry.
    pub fn max_finite(&self) -> f64 {
        (self.sentinel - 1.0) / (2.0 * self.n as f64)
    }
}

/// `D_ij = ||c_i - c_j||` for `|i - j| > e`, sentinel otherwise.
pub fn build_selfsim(slice: &BandSlice, exclusion: usize) -> Result<SelfSimMatrix> {
    let n = slice.len();
    if n < 2 * exclusion + 2 {
        return Err(Error::invalid(format!(
            "band slice of {n} columns too short for exclusion band {exclusion}"
        )));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        let ci = slice.column(i);
        for j in i + 1..n {
            let d = ci
                .iter()
                .zip(slice.column(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    SelfSimMatrix::from_distances(n, exclusion, dist)
}

/// Index map of the reflection-extended traversal: `2n` positions, with the
/// original sequence occupying `[n/2, n/2 + n)` and mirrored copies (without
/// repeating the end columns) on either side.
pub fn reflection_map(n: usize) -> Vec<usize> {
    let start = (n / 2) as isize;
    (0..2 * n).map(|k| mirror(k as isize - start, n)).collect()
}

fn mirror(q: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = q.rem_euclid(period);
    (if m < n as isize { m } else { period - m }) as usize
}

/// Self-similarity of the reflection-extended traversal (size `2n`). The band rule
/// is applied to the extended indices.
pub fn extend_by_reflection(matrix: &SelfSimMatrix) -> SelfSimMatrix {
    let n = matrix.len();
    let map = reflection_map(n);
    let size = 2 * n;
    let mut dist = vec![0.0; size * size];
    for (i, ri) in map.iter().enumerate() {
        for (j, rj) in map.iter().enumerate() {
            dist[i * size + j] = matrix.raw(*ri, *rj);
        }
    }
    SelfSimMatrix::from_distances(size, matrix.exclusion(), dist).expect("extension keeps invariants")
}
