//! Image, mask and field containers plus the sampling and filtering primitives
//! shared by every stage.

mod band;
mod field;
mod filter;
mod image;
pub mod io;
mod mask;

pub use band::{sample_band, BandSlice};
pub use field::{ScalarField, VectorField};
pub use filter::{gaussian_blur, gaussian_kernel, reflect_index, Planar};

pub use image::RasterImage;
pub use mask::{connected_components, BinaryMask, ComponentTable};
