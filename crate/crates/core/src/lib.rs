pub mod autodirect;
pub mod crf;
pub mod descriptor;
pub mod error;
pub mod flowfield;
pub mod geom;
pub mod pipeline;
pub mod raster;
pub mod renderer;
pub mod repeat1d;

pub use error::{Error, Result, Stage};
pub use geom::Vec2;
