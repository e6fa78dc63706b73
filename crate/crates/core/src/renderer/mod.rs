//! Texture extension, time-varying warps, crossfaded loop frames and encoding.

mod encode;
mod inpaint;
mod texture;
mod warp;

pub use encode::{
    encode_gif, encode_outputs, frame_file_name, gif_delay, median_cut, write_gif, write_png_sequence, OutputFormat,
};
pub use inpaint::{inpaint_fmm, DEFAULT_INPAINT_RADIUS};
pub use texture::{
    default_margin, extend_texture, poisson_blend, ExtendedTexture, Provenance, MARGIN_SLACK, POISSON_MAX_ITERATIONS,
    POISSON_TOLERANCE,
};
pub use warp::{blend_loop, render_frame, warp, FrameSequence, LoopSpec};
