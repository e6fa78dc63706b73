use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

use super::{compatibility, LabelSet, UnaryVolume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeanFieldParams {
    /// Spatial bandwidth of the pairwise kernel, pixels.
    pub theta_alpha: f64,
    /// Bandwidth on the binary mask-membership feature. Any value far below 1
    /// disconnects the mask components, which is how the solver treats it.
    pub theta_beta: f64,
    pub iterations: usize,
    pub pairwise_weight: f64,
}

impl Default for MeanFieldParams {
    fn default() -> Self {
        MeanFieldParams {
            theta_alpha: 10.0,
            theta_beta: 1e-5,
            iterations: 10,
            pairwise_weight: 1.0,
        }
    }
}

/// Chosen label per masked pixel (raster order) and its marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssignment {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<(usize, usize)>,
    pub labels: Vec<usize>,
    pub confidence: Vec<f64>,
}

impl LabelAssignment {
    /// Label of each pixel in a full raster (`None` outside the mask).
    pub fn to_raster(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.width * self.height];
        for (&(x, y), &l) in self.pixels.iter().zip(&self.labels) {
            out[y * self.width + x] = Some(l);
        }
        out
    }
}

/// Free energy after every iteration (index 0 is the initialization).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub free_energy: Vec<f64>,
}

/// Lowest-cost label per pixel, ties to the lowest index.
pub fn solve_unary_only(unary: &UnaryVolume) -> LabelAssignment {
    let n = unary.pixels().len();
    let mut labels = Vec::with_capacity(n);
    let mut confidence = Vec::with_capacity(n);
    for i in 0..n {
        let c = unary.costs(i);
        let mut best = 0;
        for (l, v) in c.iter().enumerate() {
            if *v < c[best] {
                best = l;
            }
        }
        labels.push(best);
        confidence.push(1.0);
    }
    let (width, height) = unary.dimensions();
    LabelAssignment {
        width,
        height,
        pixels: unary.pixels().to_vec(),
        labels,
        confidence,
    }
}

pub fn meanfield_solve(
    unary: &UnaryVolume,
    labels: &LabelSet,
    mask: &BinaryMask,
    params: &MeanFieldParams,
) -> Result<LabelAssignment> {
    solve(unary, labels, mask, params, false).map(|(a, _)| a)
}

/// As [`meanfield_solve`], also evaluating the free energy at every step.
pub fn meanfield_solve_traced(
    unary: &UnaryVolume,
    labels: &LabelSet,
    mask: &BinaryMask,
    params: &MeanFieldParams,
) -> Result<(LabelAssignment, SolveTrace)> {
    solve(unary, labels, mask, params, true)
}

/// A connected component's pixels inside its bounding box.
struct Block {
    w: usize,
    h: usize,
    /// (index into the unary pixel list, local offset)
    members: Vec<(usize, usize)>,
}

fn blocks(unary: &UnaryVolume, mask: &BinaryMask) -> Vec<Block> {
    let table = mask.components();
    let width = mask.width();
    let mut bounds = vec![(usize::MAX, usize::MAX, 0usize, 0usize); table.count()];
    let mut members: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); table.count()];
    for (i, &(x, y)) in unary.pixels().iter().enumerate() {
        let c = table.label(y * width + x).expect("unary pixel inside mask");
        let b = &mut bounds[c];
        *b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
        members[c].push((i, x, y));
    }
    bounds
        .into_iter()
        .zip(members)
        .filter(|(_, m)| !m.is_empty())
        .map(|((x0, y0, x1, y1), m)| {
            let w = x1 - x0 + 1;
            Block {
                w,
                h: y1 - y0 + 1,
                members: m.into_iter().map(|(i, x, y)| (i, (y - y0) * w + (x - x0))).collect(),
            }
        })
        .collect()
}

/// Unnormalized Gaussian taps (peak 1) for offsets -r..=r.
fn spatial_kernel(theta: f64) -> Vec<f64> {
    let r = (3.0 * theta).ceil() as isize;
    (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * theta * theta)).exp())
        .collect()
}

/// Separable convolution with zero padding.
fn filter_plane(plane: &[f64], w: usize, h: usize, kernel: &[f64], tmp: &mut [f64], out: &mut [f64]) {
    let r = (kernel.len() / 2) as isize;
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = (x as isize - r).max(0) as usize;
            let hi = ((x as isize + r) as usize).min(w - 1);
            let mut acc = 0.0;
            for xx in lo..=hi {
                acc += kernel[(xx as isize - x as isize + r) as usize] * row[xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    for y in 0..h {
        let lo = (y as isize - r).max(0) as usize;
        let hi = ((y as isize + r) as usize).min(h - 1);
        let o = &mut out[y * w..(y + 1) * w];
        o.iter_mut().for_each(|v| *v = 0.0);
        for yy in lo..=hi {
            let k = kernel[(yy as isize - y as isize + r) as usize];
            let src = &tmp[yy * w..(yy + 1) * w];
            for (a, b) in o.iter_mut().zip(src) {
                *a += k * b;
            }
        }
    }
}

fn softmax_neg(energies: &[f64], out: &mut [f64]) {
    let m = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (o, e) in out.iter_mut().zip(energies) {
        *o = (-(e - m)).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

/// Pairwise messages `sum_{q != p} k(p, q) sum_l' (1 - mu(l, l')) Q_q(l')`,
/// computed per connected component so no mass crosses between components.
fn messages(q: &[f64], nl: usize, blocks: &[Block], penalty: &[f64], kernel: &[f64], out: &mut [f64]) {
    for b in blocks {
        let area = b.w * b.h;
        let mut planes = vec![0.0; nl * area];
        // Mix labels first, then filter: linear, so equivalent to filtering each
        // marginal and mixing afterwards.
        for &(i, off) in &b.members {
            let qi = &q[i * nl..(i + 1) * nl];
            for l in 0..nl {
                let prow = &penalty[l * nl..(l + 1) * nl];
                let mut acc = 0.0;
                for (p, v) in prow.iter().zip(qi) {
                    acc += p * v;
                }
                planes[l * area + off] = acc;
            }
        }
        let filtered: Vec<Vec<f64>> = planes
            .par_chunks(area)
            .map(|plane| {
                let mut tmp = vec![0.0; area];
                let mut f = vec![0.0; area];
                filter_plane(plane, b.w, b.h, kernel, &mut tmp, &mut f);
                f
            })
            .collect();
        for &(i, off) in &b.members {
            for l in 0..nl {
                out[i * nl + l] = filtered[l][off] - planes[l * area + off];
            }
        }
    }
}

fn free_energy(q: &[f64], unary: &UnaryVolume, msg: &[f64], weight: f64) -> f64 {
    let mut f = 0.0;
    for ((qv, u), m) in q.iter().zip(unary.raw()).zip(msg) {
        f += qv * u + 0.5 * weight * qv * m;
        if *qv > 0.0 {
            f += qv * qv.ln();
        }
    }
    f
}

fn solve(
    unary: &UnaryVolume,
    labels: &LabelSet,
    mask: &BinaryMask,
    params: &MeanFieldParams,
    trace: bool,
) -> Result<(LabelAssignment, SolveTrace)> {
    let nl = labels.len();
    if unary.label_count() != nl {
        return Err(Error::invalid("unary volume and label set sizes differ"));
    }
    if unary.dimensions() != mask.dimensions() {
        return Err(Error::invalid("unary volume and mask dimensions differ"));
    }
    if unary.pixels().iter().any(|&(x, y)| !mask.get(x, y)) {
        return Err(Error::invalid("unary pixel outside the mask"));
    }
    if !(params.theta_alpha.is_finite() && params.theta_alpha > 0.0) {
        return Err(Error::invalid("theta_alpha must be positive"));
    }
    if params.iterations == 0 {
        return Err(Error::invalid("mean field needs at least one iteration"));
    }
    if !(params.pairwise_weight.is_finite() && params.pairwise_weight >= 0.0) {
        return Err(Error::invalid("pairwise weight must be finite and non-negative"));
    }
    let n = unary.pixels().len();
    let mut penalty = vec![0.0; nl * nl];
    for a in 0..nl {
        for b in 0..nl {
            penalty[a * nl + b] = 1.0 - compatibility(labels.get(a), labels.get(b));
        }
    }
    let kernel = spatial_kernel(params.theta_alpha);
    let blocks = blocks(unary, mask);

    let mut q = vec![0.0; n * nl];
    q.par_chunks_mut(nl)
        .enumerate()
        .for_each(|(i, qi)| softmax_neg(unary.costs(i), qi));
    let mut msg = vec![0.0; n * nl];
    let mut st = SolveTrace::default();
    let w = params.pairwise_weight;

    for _ in 0..params.iterations {
        messages(&q, nl, &blocks, &penalty, &kernel, &mut msg);
        if trace && st.free_energy.is_empty() {
            st.free_energy.push(free_energy(&q, unary, &msg, w));
        }
        q.par_chunks_mut(nl).enumerate().for_each(|(i, qi)| {
            let e: Vec<f64> = unary
                .costs(i)
                .iter()
                .zip(&msg[i * nl..(i + 1) * nl])
                .map(|(u, m)| u + w * m)
                .collect();
            softmax_neg(&e, qi);
        });
        if trace {
            messages(&q, nl, &blocks, &penalty, &kernel, &mut msg);
            let f = free_energy(&q, unary, &msg, w);
            log::debug!("mean field free energy {f:.6}");
            st.free_energy.push(f);
        }
    }

    let mut out_labels = Vec::with_capacity(n);
    let mut confidence = Vec::with_capacity(n);
    for qi in q.chunks(nl) {
        let mut best = 0;
        for (l, v) in qi.iter().enumerate() {
            if *v > qi[best] {
                best = l;
            }
        }
        out_labels.push(best);
        confidence.push(qi[best]);
    }
    let (width, height) = unary.dimensions();
    Ok((
        LabelAssignment {
            width,
            height,
            pixels: unary.pixels().to_vec(),
            labels: out_labels,
            confidence,
        },
        st,
    ))
}
