use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crf::{LabelParams, MeanFieldParams, DEFAULT_LAMBDA};
use crate::descriptor::DescriptorBackend;
use crate::error::{Error, Result};
use crate::flowfield::{DirectionStroke, DEFAULT_ATTENUATION_SPACING, DEFAULT_GRID_STEP, DEFAULT_SPARSIFY_SIGMA};
use crate::renderer::LoopSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    #[default]
    Crf,
    #[serde(alias = "unary")]
    UnaryOnly,
}

/// How the motion direction is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionSpec {
    /// One global direction, degrees (x right, y down).
    Angle { degrees: f64 },
    Strokes { strokes: Vec<DirectionStroke> },
    /// Use the top suggestion from the image itself.
    Auto,
}

impl Default for DirectionSpec {
    fn default() -> Self {
        DirectionSpec::Angle { degrees: 0.0 }
    }
}

/// Everything that determines a run. Paths are only used by the CLI; library
/// callers pass decoded images directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectConfig {
    pub image: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub direction: DirectionSpec,
    pub soft_boundary: bool,
    pub frames: usize,
    pub fps: f64,
    /// Long side of the mask bounding box after downsampling.
    pub working_long_side: usize,
    pub mode: SolverMode,
    pub descriptor: DescriptorBackend,
    pub band_width: usize,
    pub exclusion: usize,
    pub labels: LabelParams,
    pub lambda: f64,
    pub meanfield: MeanFieldParams,
    pub sparsify_sigma: f64,
    pub grid_step: usize,
    pub attenuation_spacing: f64,
    /// Texture margin override; default is the largest displacement plus 8 px.
    pub margin: Option<usize>,
    pub corner_count: usize,
    /// Reserved for the jittered RBF retry; the run itself is deterministic.
    pub seed: u64,
    /// Worker threads for this run (None: the global pool).
    pub threads: Option<usize>,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            image: None,
            mask: None,
            direction: DirectionSpec::default(),
            soft_boundary: false,
            frames: LoopSpec::default().frames,
            fps: LoopSpec::default().fps,
            working_long_side: 300,
            mode: SolverMode::Crf,
            descriptor: DescriptorBackend::default(),
            band_width: 17,
            exclusion: 8,
            labels: LabelParams::default(),
            lambda: DEFAULT_LAMBDA,
            meanfield: MeanFieldParams::default(),
            sparsify_sigma: DEFAULT_SPARSIFY_SIGMA,
            grid_step: DEFAULT_GRID_STEP,
            attenuation_spacing: DEFAULT_ATTENUATION_SPACING,
            margin: None,
            corner_count: crate::autodirect::DEFAULT_CORNER_COUNT,
            seed: 0,
            threads: None,
        }
    }
}

impl ProjectConfig {
    pub fn loop_spec(&self) -> LoopSpec {
        LoopSpec { frames: self.frames, fps: self.fps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::config("frame count must be at least 2"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::config("fps must be positive"));
        }
        if self.working_long_side < 64 {
            return Err(Error::config("working_long_side must be at least 64"));
        }
        if self.band_width == 0 || self.band_width.is_multiple_of(2) {
            return Err(Error::config("band_width must be odd"));
        }
        if self.exclusion == 0 {
            return Err(Error::config("exclusion must be at least 1"));
        }
        if self.meanfield.iterations == 0 {
            return Err(Error::config("mean field iterations must be at least 1"));
        }
        if self.grid_step == 0 || !(self.sparsify_sigma > 0.0) || !(self.attenuation_spacing >= 1.0) {
            return Err(Error::config("sparsify / attenuation parameters out of range"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        if self.corner_count == 0 {
            return Err(Error::config("corner_count must be at least 1"));
        }
        if let DirectionSpec::Angle { degrees } = self.direction {
            if !degrees.is_finite() {
                return Err(Error::config("direction angle must be finite"));
            }
        }
        if let DirectionSpec::Strokes { strokes } = &self.direction {
            if strokes.is_empty() {
                return Err(Error::config("stroke list is empty"));
            }
        }
        for p in [&self.image, &self.mask].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Hash of the run-relevant settings plus the input bytes. Paths and the
    /// thread count are excluded since they do not change the output.
    pub fn content_hash(&self, image_bytes: &[u8], mask_bytes: &[u8]) -> String {
        let mut c = self.clone();
        c.image = None;
        c.mask = None;
        c.threads = None;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&c).expect("config serializes"));
        h.update((image_bytes.len() as u64).to_le_bytes());
        h.update(image_bytes);
        h.update((mask_bytes.len() as u64).to_le_bytes());
        h.update(mask_bytes);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `{"strokes": [{"points": [[x, y], ...]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeFile {
    pub strokes: Vec<StrokeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeEntry {
    pub points: Vec<[f64; 2]>,
}

impl StrokeFile {
    pub fn parse(text: &str) -> Result<Vec<DirectionStroke>> {
        let f: StrokeFile = serde_json::from_str(text)?;
        f.strokes
            .into_iter()
            .map(|s| DirectionStroke::new(s.points.into_iter().map(|[x, y]| crate::Vec2::new(x, y)).collect()))
            .collect()
    }
}
