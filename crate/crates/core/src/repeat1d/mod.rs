//! Unit-of-repetition detection along a line: self-similarity of band columns,
//! a constrained minimum-cost path, and the path's offsets from the diagonal.

mod offsets;
mod path;
mod selfsim;

pub use offsets::{path_to_offsets, OffsetSeedSet};
pub use path::{min_cost_path, min_cost_path_until, MatchPath};
pub use selfsim::{build_selfsim, extend_by_reflection, reflection_map, SelfSimMatrix};

use crate::error::Result;
use crate::raster::BandSlice;

/// Everything the repetition stage produces for one sampled line.
#[derive(Debug, Clone)]
pub struct Repetition {
    pub matrix: SelfSimMatrix,
    pub extended: SelfSimMatrix,
    pub path: MatchPath,
    pub seeds: OffsetSeedSet,
}

/// Self-similarity, reflection extension, DP path and seed offsets for a slice.
pub fn detect_repetition(slice: &BandSlice, exclusion: usize) -> Result<Repetition> {
    let matrix = build_selfsim(slice, exclusion)?;
    let extended = extend_by_reflection(&matrix);
    let n = matrix.len();
    // stop at the last row of the window the seeds are read from
    let path = min_cost_path_until(&extended, n / 2 + n - 1)?;
    let seeds = path_to_offsets(&path, slice.len(), slice.direction)?;
    Ok(Repetition {
        matrix,
        extended,
        path,
        seeds,
    })
}
