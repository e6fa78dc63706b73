//! End-to-end orchestration, output writing and the HTTP job service.

mod config;
mod run;
pub mod service;

pub use config::{DirectionSpec, ProjectConfig, SolverMode, StrokeEntry, StrokeFile};
pub use run::{run_on, run_pipeline, working_scale, CellReport, CellSolution, Diagnostics, LoopResult, StageTiming, MIN_CELL_EXTENT};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::renderer::{gif_delay, write_gif, write_png_sequence};

/// `loop.json` written next to the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSidecar {
    pub frames: usize,
    pub fps: f64,
    pub gif_delay_cs: u16,
    pub width: usize,
    pub height: usize,
    pub config_hash: String,
    pub max_forward: f64,
    pub max_backward: f64,
    pub margin: usize,
    pub anchors: usize,
    pub scale: f64,
}

/// Write PNG frames plus `loop.json` into `out_dir`, and optionally a GIF.
pub fn write_outputs(result: &LoopResult, fps: f64, config_hash: &str, out_dir: Option<&Path>, gif: Option<&Path>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let (w, h) = result.frames.frames[0].dimensions();
    let d = &result.diagnostics;
    let sidecar = LoopSidecar {
        frames: result.frames.len(),
        fps,
        gif_delay_cs: gif_delay(fps),
        width: w,
        height: h,
        config_hash: config_hash.to_string(),
        max_forward: d.max_forward,
        max_backward: d.max_backward,
        margin: d.margin,
        anchors: d.anchors,
        scale: d.scale,
    };
    if let Some(dir) = out_dir {
        written.extend(write_png_sequence(&result.frames, dir)?);
        let p = dir.join("loop.json");
        fs::write(&p, serde_json::to_vec_pretty(&sidecar)?)?;
        written.push(p);
    }
    if let Some(g) = gif {
        write_gif(&result.frames, fps, g)?;
        written.push(g.to_path_buf());
    }
    Ok(written)
}
