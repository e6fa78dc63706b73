use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::autodirect::{suggest_directions, DEFAULT_MAX_DIRECTIONS};
use crate::crf::{
    build_labels, compute_unary, init_guess_field, meanfield_solve, solve_unary_only, LabelAssignment, LabelSet,
};
use crate::descriptor::{compute_descriptors, DescriptorField};
use crate::error::{Error, Result, Stage};
use crate::flowfield::{
    add_attenuation_anchors, flow_to_hsv, invert_sparse, raw_field, rbf_densify, sparsify, split_by_strokes,
    write_flow, SparseFlow,
};
use crate::geom::Vec2;
use crate::raster::io::write_image;
use crate::raster::{sample_band, BinaryMask, RasterImage, VectorField};
use crate::renderer::{blend_loop, default_margin, extend_texture, FrameSequence};
use crate::repeat1d::{detect_repetition, Repetition};

use super::{DirectionSpec, ProjectConfig, SolverMode};

/// Cells shorter than this along their direction are skipped.
pub const MIN_CELL_EXTENT: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub origin: Vec2,
    pub direction: Vec2,
    pub pixels: usize,
    pub line_length: usize,
    pub median_offset: Option<i64>,
    pub labels: usize,
    pub anchors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub scale: f64,
    pub working_size: (usize, usize),
    pub cells: Vec<CellReport>,
    pub warnings: Vec<String>,
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
    pub margin: usize,
    pub max_forward: f64,
    pub max_backward: f64,
    pub anchors: usize,
}

/// Output of one run.
#[derive(Debug, Clone)]
pub struct LoopResult {
    pub frames: FrameSequence,
    /// Full-resolution fields, clipped to the motion support.
    pub forward: VectorField,
    pub backward: VectorField,
    pub support: BinaryMask,
    pub cells: Vec<CellSolution>,
    pub diagnostics: Diagnostics,
}

struct Clock {
    start: Instant,
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now, timings: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let secs = (now - self.last).as_secs_f64();
        match self.timings.iter_mut().find(|t| t.stage == stage) {
            Some(t) => t.seconds += secs,
            None => self.timings.push(StageTiming { stage: stage.to_string(), seconds: secs }),
        }
        self.last = now;
    }
}

/// Run from the image and mask paths in the config.
pub fn run_pipeline(config: &ProjectConfig, debug_dir: Option<&Path>) -> Result<LoopResult> {
    config.validate()?;
    let image_path = config.image.as_ref().ok_or_else(|| Error::config("no image path given"))?;
    let mask_path = config.mask.as_ref().ok_or_else(|| Error::config("no mask path given"))?;
    let image = crate::raster::io::read_image(image_path).map_err(|e| e.at(Stage::Load))?;
    let mask = crate::raster::io::read_mask(mask_path).map_err(|e| e.at(Stage::Load))?;
    run_on(&image, &mask, config, debug_dir)
}

/// Run on decoded inputs, optionally inside a dedicated thread pool.
pub fn run_on(image: &RasterImage, mask: &BinaryMask, config: &ProjectConfig, debug_dir: Option<&Path>) -> Result<LoopResult> {
    config.validate()?;
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(image, mask, config, debug_dir))
        }
        None => run_inner(image, mask, config, debug_dir),
    }
}

struct CellSpec {
    mask: BinaryMask,
    direction: Vec2,
    origin: Vec2,
}

/// Working-resolution scale: the mask bounding box long side maps to
/// `working_long_side`, never upsampling.
pub fn working_scale(mask: &BinaryMask, working_long_side: usize) -> f64 {
    match mask.bbox() {
        Some((x0, y0, x1, y1)) => {
            let long = (x1 - x0 + 1).max(y1 - y0 + 1) as f64;
            (working_long_side as f64 / long).min(1.0)
        }
        None => 1.0,
    }
}

fn cells_for(
    mask: &BinaryMask,
    direction: &DirectionSpec,
    auto: Option<Vec2>,
    scale: f64,
) -> Result<Vec<CellSpec>> {
    let table = mask.components();
    let components: Vec<BinaryMask> = (0..table.count()).map(|c| mask.component_mask(c)).collect();
    let global = match direction {
        DirectionSpec::Angle { degrees } => Some(Vec2::from_degrees(*degrees)),
        DirectionSpec::Auto => auto,
        DirectionSpec::Strokes { .. } => None,
    };
    let mut out = Vec::new();
    if let Some(d) = global {
        for c in components {
            let (x, y) = c.central_pixel().expect("component non-empty");
            out.push(CellSpec { mask: c, direction: d, origin: Vec2::new(x as f64, y as f64) });
        }
        return Ok(out);
    }
    let DirectionSpec::Strokes { strokes } = direction else {
        return Err(Error::stage(Stage::Direction, "no direction available"));
    };
    let scaled: Vec<crate::flowfield::DirectionStroke> = strokes
        .iter()
        .map(|s| {
            crate::flowfield::DirectionStroke::new(
                s.points().iter().map(|p| Vec2::new((p.x + 0.5) * scale - 0.5, (p.y + 0.5) * scale - 0.5)).collect(),
            )
        })
        .collect::<Result<_>>()
        .map_err(|e| e.at(Stage::Direction))?;
    let cells = split_by_strokes(mask, &scaled).map_err(|e| e.at(Stage::Direction))?;
    for cell in cells {
        for c in &components {
            let part = cell.mask.and(c)?;
            if part.is_empty() {
                continue;
            }
            let origin = nearest_active(&part, cell.origin);
            out.push(CellSpec { mask: part, direction: cell.direction, origin });
        }
    }
    Ok(out)
}

fn nearest_active(mask: &BinaryMask, p: Vec2) -> Vec2 {
    if mask.contains_point(p) {
        return p;
    }
    let mut best = Vec2::ZERO;
    let mut bd = f64::INFINITY;
    for (x, y) in mask.active_pixels() {
        let q = Vec2::new(x as f64, y as f64);
        let d = q.distance(p);
        if d < bd {
            bd = d;
            best = q;
        }
    }
    best
}

/// The line through `origin` along `d` spanning the mask's projected extent,
/// clipped to the image. Returns (start, length).
fn cell_line(mask: &BinaryMask, origin: Vec2, d: Vec2) -> (Vec2, usize) {
    let (w, h) = mask.dimensions();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in mask.active_pixels() {
        let t = (Vec2::new(x as f64, y as f64) - origin).dot(d);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    // Clip to the image rectangle.
    let inside = |t: f64| {
        let p = origin + d * t;
        p.x >= 0.0 && p.y >= 0.0 && p.x <= (w - 1) as f64 && p.y <= (h - 1) as f64
    };
    while lo < 0.0 && !inside(lo) {
        lo += 1.0;
    }
    while hi > 0.0 && !inside(hi) {
        hi -= 1.0;
    }
    let len = (hi - lo).floor().max(0.0) as usize + 1;
    (origin + d * lo, len)
}

/// Intermediate results for one cell, at working resolution.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub report: CellReport,
    pub mask: BinaryMask,
    pub flow: SparseFlow,
    pub repetition: Repetition,
    pub labels: LabelSet,
    pub assignment: LabelAssignment,
    /// Per-pixel motion, i.e. the negated label vectors.
    pub motion: VectorField,
}

fn solve_cell(
    image: &RasterImage,
    descriptors: &DescriptorField,
    cell: &CellSpec,
    config: &ProjectConfig,
    clock: &mut Clock,
) -> Result<Option<CellSolution>> {
    let d = cell.direction.normalized().ok_or_else(|| Error::stage(Stage::Direction, "zero direction"))?;
    let (start, length) = cell_line(&cell.mask, cell.origin, d);
    if length < MIN_CELL_EXTENT.max(2 * config.exclusion + 2) {
        return Ok(None);
    }
    let slice = sample_band(image, start, d, length, config.band_width).map_err(|e| e.at(Stage::Repeat1d))?;
    let repetition = detect_repetition(&slice, config.exclusion).map_err(|e| e.at(Stage::Repeat1d))?;
    clock.lap("repeat1d");
    let seeds = &repetition.seeds;
    if seeds.is_empty() {
        return Err(Error::stage(Stage::Repeat1d, "no repetition found along the sampled line"));
    }
    let labels = build_labels(seeds, d, &config.labels).map_err(|e| e.at(Stage::Labels))?;
    let magnitudes = seeds.per_position(length);
    let guess = init_guess_field(&cell.mask, start, d, &magnitudes, seeds.dominant_sign()).map_err(|e| e.at(Stage::Labels))?;
    let unary = compute_unary(descriptors, &labels, &guess, &cell.mask, config.lambda).map_err(|e| e.at(Stage::Crf))?;
    clock.lap("labels");
    let assignment = match config.mode {
        SolverMode::Crf => meanfield_solve(&unary, &labels, &cell.mask, &config.meanfield).map_err(|e| e.at(Stage::Crf))?,
        SolverMode::UnaryOnly => solve_unary_only(&unary),
    };
    clock.lap("crf");
    // Labels point from a pixel to its repetition; content has to move the
    // other way for the backward warp to drift along the user direction.
    let motion = raw_field(&assignment, &labels, &cell.mask).map_err(|e| e.at(Stage::Flow))?.negated();
    let flow = sparsify(&motion, &cell.mask, config.sparsify_sigma, config.grid_step).map_err(|e| e.at(Stage::Flow))?;
    clock.lap("flow");
    Ok(Some(CellSolution {
        report: CellReport {
            origin: cell.origin,
            direction: d,
            pixels: cell.mask.count(),
            line_length: length,
            median_offset: seeds.median_magnitude(),
            labels: labels.len(),
            anchors: flow.len(),
        },
        mask: cell.mask.clone(),
        flow,
        repetition,
        labels,
        assignment,
        motion,
    }))
}

fn run_inner(image: &RasterImage, mask: &BinaryMask, config: &ProjectConfig, debug_dir: Option<&Path>) -> Result<LoopResult> {
    let mut clock = Clock::new();
    let mut diag = Diagnostics::default();
    if image.dimensions() != mask.dimensions() {
        return Err(Error::stage(Stage::Load, "image and mask dimensions differ"));
    }
    if mask.is_empty() {
        return Err(Error::stage(Stage::Load, "mask is empty"));
    }
    let (w, h) = image.dimensions();
    clock.lap("load");

    let scale = working_scale(mask, config.working_long_side);
    let (ww, wh) = if scale < 1.0 {
        (((w as f64 * scale).round() as usize).max(1), ((h as f64 * scale).round() as usize).max(1))
    } else {
        (w, h)
    };
    let (work_image, work_mask) = if (ww, wh) == (w, h) {
        (image.clone(), mask.clone())
    } else {
        (
            image.resize(ww, wh).map_err(|e| e.at(Stage::Resample))?,
            mask.resize_nearest(ww, wh).map_err(|e| e.at(Stage::Resample))?,
        )
    };
    if work_mask.is_empty() {
        return Err(Error::stage(Stage::Resample, "mask vanished at working resolution"));
    }
    diag.scale = ww as f64 / w as f64;
    diag.working_size = (ww, wh);
    clock.lap("resample");

    let descriptors = compute_descriptors(&work_image, &config.descriptor).map_err(|e| e.at(Stage::Descriptors))?;
    clock.lap("descriptors");

    let auto = if config.direction == DirectionSpec::Auto {
        let vote = suggest_directions(&work_image, &descriptors, config.corner_count, DEFAULT_MAX_DIRECTIONS)
            .map_err(|e| e.at(Stage::Direction))?;
        let top = vote.winners.first().ok_or_else(|| Error::stage(Stage::Direction, "no direction suggested"))?;
        log::info!("auto direction {:.1} deg ({} votes)", top.angle_deg, top.votes);
        Some(top.direction)
    } else {
        None
    };
    let cells = cells_for(&work_mask, &config.direction, auto, diag.scale)?;
    clock.lap("direction");

    let mut outputs = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        match solve_cell(&work_image, &descriptors, cell, config, &mut clock)? {
            Some(o) => outputs.push(o),
            None => {
                let msg = format!(
                    "cell {i} at ({:.0}, {:.0}) is shorter than {MIN_CELL_EXTENT} px along its direction; skipped",
                    cell.origin.x, cell.origin.y
                );
                log::warn!("{msg}");
                diag.warnings.push(msg);
            }
        }
    }
    if outputs.is_empty() {
        return Err(Error::stage(Stage::Repeat1d, "no mask region is long enough along the motion direction"));
    }

    let flows: Vec<SparseFlow> = outputs.iter().map(|o| o.flow.clone()).collect();
    let mut all = SparseFlow::concat(&flows).map_err(|e| e.at(Stage::Flow))?;
    if config.soft_boundary {
        all = add_attenuation_anchors(&all, &work_mask, config.attenuation_spacing).map_err(|e| e.at(Stage::Flow))?;
    }
    let (f1w, _) = rbf_densify(&all, ww, wh).map_err(|e| e.at(Stage::Flow))?;
    let (f2w, _) = rbf_densify(&invert_sparse(&all), ww, wh).map_err(|e| e.at(Stage::Flow))?;
    diag.anchors = all.len();
    let (f1, f2) = if (ww, wh) == (w, h) { (f1w.clone(), f2w.clone()) } else { (f1w.resize(w, h), f2w.resize(w, h)) };
    let support = if config.soft_boundary {
        mask.dilate(config.attenuation_spacing * w as f64 / ww as f64)
    } else {
        mask.clone()
    };
    let f1c = f1.masked(&support);
    let f2c = f2.masked(&support);
    diag.max_forward = f1c.max_magnitude();
    diag.max_backward = f2c.max_magnitude();
    clock.lap("flow");

    let margin = config.margin.unwrap_or_else(|| default_margin(&support, &[&f1c, &f2c]));
    let texture = extend_texture(image, &support, &f1, &f2, Some(margin)).map_err(|e| e.at(Stage::Texture))?;
    diag.margin = margin;
    clock.lap("texture");

    let frames = blend_loop(&texture, &f1c, &f2c, &config.loop_spec()).map_err(|e| e.at(Stage::Render))?;
    clock.lap("render");

    diag.cells = outputs.iter().map(|o| o.report.clone()).collect();
    if let Some(dir) = debug_dir {
        write_debug(dir, &outputs, &all, &f1w, &f2w, &texture.canvas).map_err(|e| e.at(Stage::Encode))?;
        clock.lap("debug");
    }
    diag.total_seconds = (Instant::now() - clock.start).as_secs_f64();
    diag.timings = clock.timings;
    Ok(LoopResult { frames, forward: f1c, backward: f2c, support, cells: outputs, diagnostics: diag })
}

fn selfsim_image(rep: &Repetition) -> Result<RasterImage> {
    let m = &rep.extended;
    let n = m.len();
    let max = m.max_finite().max(1e-12);
    let mut img = RasterImage::from_fn(n, n, |x, y| {
        if m.is_excluded(y, x) {
            [1.0, 1.0, 1.0]
        } else {
            let v = (m.value(y, x) / max) as f32;
            [v, v, v]
        }
    })?;
    for &(i, j) in &rep.path.points {
        img.set_pixel(j, i, [1.0, 0.0, 0.0]);
    }
    Ok(img)
}

fn write_debug(
    dir: &Path,
    outputs: &[CellSolution],
    anchors: &SparseFlow,
    f1: &VectorField,
    f2: &VectorField,
    canvas: &RasterImage,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, o) in outputs.iter().enumerate() {
        let p = |name: &str| -> PathBuf { dir.join(format!("cell{i:02}_{name}")) };
        write_image(&selfsim_image(&o.repetition)?, p("selfsim.png"))?;
        fs::write(p("seeds.json"), serde_json::to_vec_pretty(&o.repetition.seeds.offsets)?)?;
        fs::write(p("labels.json"), serde_json::to_vec_pretty(&o.labels)?)?;
        let confidence: Vec<f64> = o.assignment.confidence.clone();
        fs::write(p("confidence.json"), serde_json::to_vec(&confidence)?)?;
        write_image(&flow_to_hsv(&o.motion), p("labels.png"))?;
    }
    fs::write(dir.join("anchors.json"), serde_json::to_vec_pretty(anchors)?)?;
    write_flow(f1, dir.join("forward.elff"))?;
    write_flow(f2, dir.join("backward.elff"))?;
    write_image(&flow_to_hsv(f1), dir.join("forward.png"))?;
    write_image(&flow_to_hsv(f2), dir.join("backward.png"))?;
    write_image(canvas, dir.join("texture.png"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_never_upsamples() {
        let m = BinaryMask::rect(1000, 800, 100, 100, 700, 400).unwrap();
        assert!((working_scale(&m, 300) - 0.5).abs() < 1e-12);
        let small = BinaryMask::rect(100, 100, 10, 10, 60, 60).unwrap();
        assert_eq!(working_scale(&small, 300), 1.0);
    }

    #[test]
    fn line_spans_extent() {
        let m = BinaryMask::rect(100, 50, 10, 20, 90, 30).unwrap();
        let (s, n) = cell_line(&m, Vec2::new(50.0, 25.0), Vec2::new(1.0, 0.0));
        assert_eq!(s, Vec2::new(10.0, 25.0));
        assert_eq!(n, 80);
    }
}
