//! Dense CRF over candidate displacement labels, solved by mean-field inference.

mod labels;
mod meanfield;
mod unary;

pub use labels::{build_labels, compatibility, LabelOrigin, LabelParams, LabelSet, DEDUP_TOLERANCE};
pub use meanfield::{
    meanfield_solve, meanfield_solve_traced, solve_unary_only, LabelAssignment, MeanFieldParams, SolveTrace,
};
pub use unary::{compute_unary, init_guess_field, GuessField, UnaryVolume, DEFAULT_LAMBDA};
