use std::borrow::Cow;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::raster::io::{to_rgb8, write_image};

use super::FrameSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    PngDir,
    Gif,
}

pub fn frame_file_name(k: usize) -> String {
    format!("frame_{k:04}.png")
}

/// Write `frame_0000.png`, ... into `dir` (created if missing).
pub fn write_png_sequence(frames: &FrameSequence, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(frames.len());
    for (k, f) in frames.frames.iter().enumerate() {
        let p = dir.join(frame_file_name(k));
        write_image(f, &p)?;
        out.push(p);
    }
    Ok(out)
}

/// GIF frame delay in centiseconds.
pub fn gif_delay(fps: f64) -> u16 {
    (100.0 / fps).round().clamp(1.0, u16::MAX as f64) as u16
}

const PALETTE_SIZE: usize = 256;
const MAX_PALETTE_SAMPLES: usize = 1 << 20;

struct ColorBox {
    colors: Vec<[u8; 3]>,
}

impl ColorBox {
    fn range(&self) -> (usize, u8) {
        let mut best = (0, 0u8);
        for c in 0..3 {
            let lo = self.colors.iter().map(|p| p[c]).min().unwrap_or(0);
            let hi = self.colors.iter().map(|p| p[c]).max().unwrap_or(0);
            if hi - lo > best.1 {
                best = (c, hi - lo);
            }
        }
        best
    }

    fn mean(&self) -> [u8; 3] {
        let n = self.colors.len().max(1) as u64;
        let mut s = [0u64; 3];
        for p in &self.colors {
            for c in 0..3 {
                s[c] += p[c] as u64;
            }
        }
        [((s[0] + n / 2) / n) as u8, ((s[1] + n / 2) / n) as u8, ((s[2] + n / 2) / n) as u8]
    }
}

/// Median-cut palette of at most `size` colours from RGB8 samples.
pub fn median_cut(samples: &[[u8; 3]], size: usize) -> Vec<[u8; 3]> {
    if samples.is_empty() || size == 0 {
        return vec![[0, 0, 0]];
    }
    let mut boxes = vec![ColorBox { colors: samples.to_vec() }];
    while boxes.len() < size {
        let Some((bi, (axis, _))) = boxes
            .iter()
            .map(|b| b.range())
            .enumerate()
            .filter(|(_, r)| r.1 > 0)
            .max_by(|a, b| a.1 .1.cmp(&b.1 .1).then(b.0.cmp(&a.0)))
        else {
            break;
        };
        let mut b = boxes.swap_remove(bi);
        b.colors.sort_unstable_by_key(|p| (p[axis], p[(axis + 1) % 3], p[(axis + 2) % 3]));
        let mid = b.colors.len() / 2;
        // Split between distinct values so both halves are non-empty.
        let pivot = b.colors[mid][axis];
        let mut cut = b.colors.partition_point(|p| p[axis] < pivot);
        if cut == 0 {
            cut = b.colors.partition_point(|p| p[axis] <= pivot);
        }
        let upper = b.colors.split_off(cut);
        boxes.push(b);
        boxes.push(ColorBox { colors: upper });
    }
    boxes.iter().map(|b| b.mean()).collect()
}

fn nearest(palette: &[[u8; 3]], c: [u8; 3]) -> u8 {
    let mut best = 0;
    let mut bd = u32::MAX;
    for (i, p) in palette.iter().enumerate() {
        let d: u32 = (0..3).map(|k| (p[k] as i32 - c[k] as i32).pow(2) as u32).sum();
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best as u8
}

/// Global palette and a per-colour index function. Fewer than 256 distinct
/// colours are kept exactly; otherwise a median-cut palette with a 32^3 lookup.
struct Quantizer {
    palette: Vec<[u8; 3]>,
    exact: Option<HashMap<[u8; 3], u8>>,
    lut: Vec<u8>,
}

impl Quantizer {
    fn new(frames: &[Vec<u8>]) -> Self {
        let mut distinct: HashMap<[u8; 3], u8> = HashMap::new();
        let mut overflow = false;
        'outer: for f in frames {
            for p in f.chunks_exact(3) {
                let c = [p[0], p[1], p[2]];
                if !distinct.contains_key(&c) {
                    if distinct.len() == PALETTE_SIZE {
                        overflow = true;
                        break 'outer;
                    }
                    let i = distinct.len() as u8;
                    distinct.insert(c, i);
                }
            }
        }
        if !overflow {
            let mut palette = vec![[0u8; 3]; distinct.len()];
            for (c, i) in &distinct {
                palette[*i as usize] = *c;
            }
            return Quantizer { palette, exact: Some(distinct), lut: Vec::new() };
        }
        let total: usize = frames.iter().map(|f| f.len() / 3).sum();
        let stride = total.div_ceil(MAX_PALETTE_SAMPLES).max(1);
        let samples: Vec<[u8; 3]> = frames
            .iter()
            .flat_map(|f| f.chunks_exact(3))
            .step_by(stride)
            .map(|p| [p[0], p[1], p[2]])
            .collect();
        let palette = median_cut(&samples, PALETTE_SIZE);
        let mut lut = vec![0u8; 32 * 32 * 32];
        for (i, slot) in lut.iter_mut().enumerate() {
            let c = [((i >> 10) as u8) << 3 | 4, (((i >> 5) & 31) as u8) << 3 | 4, ((i & 31) as u8) << 3 | 4];
            *slot = nearest(&palette, c);
        }
        Quantizer { palette, exact: None, lut }
    }

    fn index(&self, c: [u8; 3]) -> u8 {
        match &self.exact {
            Some(m) => m[&c],
            None => self.lut[((c[0] as usize >> 3) << 10) | ((c[1] as usize >> 3) << 5) | (c[2] as usize >> 3)],
        }
    }
}

/// Animated GIF with a global palette, infinite looping and
/// `round(100 / fps)` centisecond frame delays.
pub fn encode_gif(frames: &FrameSequence, fps: f64) -> Result<Vec<u8>> {
    let first = frames.frames.first().ok_or_else(|| Error::invalid("no frames to encode"))?;
    let (w, h) = first.dimensions();
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(Error::invalid("image too large for GIF"));
    }
    if frames.frames.iter().any(|f| f.dimensions() != (w, h)) {
        return Err(Error::invalid("frames differ in size"));
    }
    let rgb: Vec<Vec<u8>> = frames.frames.iter().map(to_rgb8).collect();
    let q = Quantizer::new(&rgb);
    let flat: Vec<u8> = q.palette.iter().flatten().copied().collect();
    let mut buf = Vec::new();
    {
        let mut enc = gif::Encoder::new(&mut buf, w as u16, h as u16, &flat)?;
        enc.set_repeat(gif::Repeat::Infinite)?;
        let delay = gif_delay(fps);
        for f in &rgb {
            let idx: Vec<u8> = f.chunks_exact(3).map(|p| q.index([p[0], p[1], p[2]])).collect();
            let frame = gif::Frame {
                width: w as u16,
                height: h as u16,
                delay,
                buffer: Cow::Owned(idx),
                ..Default::default()
            };
            enc.write_frame(&frame)?;
        }
    }
    Ok(buf)
}

pub fn write_gif(frames: &FrameSequence, fps: f64, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, encode_gif(frames, fps)?)?;
    Ok(())
}

/// Write frames either as a PNG directory (`path` is the directory) or a GIF.
pub fn encode_outputs(frames: &FrameSequence, format: OutputFormat, path: &Path, fps: f64) -> Result<()> {
    match format {
        OutputFormat::PngDir => write_png_sequence(frames, path).map(|_| ()),
        OutputFormat::Gif => write_gif(frames, fps, path),
    }
}
