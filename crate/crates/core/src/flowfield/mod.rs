//! From per-pixel CRF labels to smooth, approximately mutually inverse dense
//! displacement fields.

mod io;
mod rbf;
mod sparse;
mod strokes;

pub use io::{decode_flow, encode_flow, flow_to_hsv, read_flow, write_flow};
pub use rbf::{rbf_densify, rbf_fit, rbf_fit_points, PolyTerm, RbfModel, RESIDUAL_TOLERANCE};
pub use sparse::{
    add_attenuation_anchors, invert_sparse, raw_field, sparsify, Anchor, AnchorKind, SparseFlow,
    DEFAULT_ATTENUATION_SPACING, DEFAULT_GRID_STEP, DEFAULT_SPARSIFY_SIGMA, MIN_ANCHOR_SPACING,
};
pub use strokes::{split_by_strokes, Cell, DirectionStroke, StrokeSegment, BEND_THRESHOLD_DEG};

use crate::error::Result;
use crate::raster::VectorField;

/// Forward and backward dense fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPair {
    pub forward: VectorField,
    pub backward: VectorField,
    pub anchors: SparseFlow,
}

/// Concatenate the cells' anchors and densify them and their inversion.
pub fn merge_cells(cell_flows: &[SparseFlow], width: usize, height: usize) -> Result<FlowPair> {
    let all = SparseFlow::concat(cell_flows)?;
    let (forward, _) = rbf_densify(&all, width, height)?;
    let (backward, _) = rbf_densify(&invert_sparse(&all), width, height)?;
    Ok(FlowPair { forward, backward, anchors: all })
}
