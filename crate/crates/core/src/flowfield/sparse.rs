use serde::{Deserialize, Serialize};

use crate::crf::{LabelAssignment, LabelSet};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{gaussian_blur, BinaryMask, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    Motion,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub position: Vec2,
    pub vector: Vec2,
    pub kind: AnchorKind,
}

impl Anchor {
    pub fn motion(position: Vec2, vector: Vec2) -> Self {
        Anchor { position, vector, kind: AnchorKind::Motion }
    }

    pub fn zero(position: Vec2) -> Self {
        Anchor { position, vector: Vec2::ZERO, kind: AnchorKind::Zero }
    }
}

/// Anchors closer than this collide.
pub const MIN_ANCHOR_SPACING: f64 = 1.0;

/// Scattered displacement samples with pairwise spacing of at least 1 px.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseFlow {
    anchors: Vec<Anchor>,
}

impl SparseFlow {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self> {
        for a in &anchors {
            if !a.position.is_finite() || !a.vector.is_finite() {
                return Err(Error::invalid("anchor positions and vectors must be finite"));
            }
        }
        for (i, a) in anchors.iter().enumerate() {
            if anchors[i + 1..]
                .iter()
                .any(|b| a.position.distance(b.position) < MIN_ANCHOR_SPACING)
            {
                return Err(Error::invalid(format!(
                    "anchors closer than {MIN_ANCHOR_SPACING} px at ({:.2}, {:.2})",
                    a.position.x, a.position.y
                )));
            }
        }
        Ok(SparseFlow { anchors })
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Concatenate several flows (e.g. per-cell results and attenuation anchors).
    pub fn concat<'a>(flows: impl IntoIterator<Item = &'a SparseFlow>) -> Result<SparseFlow> {
        SparseFlow::new(flows.into_iter().flat_map(|f| f.anchors.iter().copied()).collect())
    }
}

/// Label vectors on masked pixels, zero elsewhere.
pub fn raw_field(assignment: &LabelAssignment, labels: &LabelSet, mask: &BinaryMask) -> Result<VectorField> {
    if (assignment.width, assignment.height) != mask.dimensions() {
        return Err(Error::invalid("assignment and mask dimensions differ"));
    }
    let mut f = VectorField::zeros(assignment.width, assignment.height);
    for (&(x, y), &l) in assignment.pixels.iter().zip(&assignment.labels) {
        if l >= labels.len() {
            return Err(Error::invalid("label index out of range"));
        }
        if mask.get(x, y) {
            f.set(x, y, labels.get(l));
        }
    }
    Ok(f)
}

pub const DEFAULT_SPARSIFY_SIGMA: f64 = 6.0;
pub const DEFAULT_GRID_STEP: usize = 8;

/// Mask-normalized Gaussian blur, sampled on the lattice `step/2 + k*step`.
/// A component with no lattice pixel contributes its most central pixel.
pub fn sparsify(field: &VectorField, mask: &BinaryMask, sigma: f64, grid_step: usize) -> Result<SparseFlow> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sparsify sigma must be positive"));
    }
    if grid_step == 0 {
        return Err(Error::invalid("grid step must be at least 1"));
    }
    if field.dimensions() != mask.dimensions() {
        return Err(Error::invalid("field and mask dimensions differ"));
    }
    if mask.is_empty() {
        return Ok(SparseFlow::default());
    }
    let blurred = gaussian_blur(field, sigma, Some(mask))?;
    let table = mask.components();
    let mut covered = vec![false; table.count()];
    let mut anchors = Vec::new();
    let (w, h) = mask.dimensions();
    let start = grid_step / 2;
    for y in (start..h).step_by(grid_step) {
        for x in (start..w).step_by(grid_step) {
            if mask.get(x, y) {
                covered[table.label(y * w + x).expect("masked")] = true;
                anchors.push(Anchor::motion(Vec2::new(x as f64, y as f64), blurred.get(x, y)));
            }
        }
    }
    for (c, done) in covered.iter().enumerate() {
        if !done {
            let (x, y) = mask.component_mask(c).central_pixel().expect("non-empty component");
            anchors.push(Anchor::motion(Vec2::new(x as f64, y as f64), blurred.get(x, y)));
        }
    }
    SparseFlow::new(anchors)
}

struct Cluster {
    position: Vec2,
    vector: Vec2,
    count: f64,
    zero: bool,
}

impl Cluster {
    fn absorb(&mut self, other: Cluster) {
        match (self.zero, other.zero) {
            (true, false) => {}
            (false, true) => *self = other,
            _ => {
                let n = self.count + other.count;
                self.position = (self.position * self.count + other.position * other.count) / n;
                self.vector = (self.vector * self.count + other.vector * other.count) / n;
                self.count = n;
            }
        }
    }
}

/// `(p, v) -> (p + v, -v)` for motion anchors; zero anchors stay put. Inverse
/// anchors landing within 1 px of each other are averaged, and a zero anchor
/// absorbs any motion anchor that collides with it.
pub fn invert_sparse(flow: &SparseFlow) -> SparseFlow {
    let mut clusters: Vec<Cluster> = Vec::with_capacity(flow.len());
    for a in flow.anchors() {
        let c = match a.kind {
            AnchorKind::Motion => Cluster { position: a.position + a.vector, vector: -a.vector, count: 1.0, zero: false },
            AnchorKind::Zero => Cluster { position: a.position, vector: Vec2::ZERO, count: 1.0, zero: true },
        };
        match clusters.iter_mut().find(|k| k.position.distance(c.position) < MIN_ANCHOR_SPACING) {
            Some(k) => k.absorb(c),
            None => clusters.push(c),
        }
    }
    // Averaging can move a cluster onto another; repeat until spacing holds.
    loop {
        let mut merged = false;
        let mut i = 0;
        while i < clusters.len() {
            let mut j = i + 1;
            while j < clusters.len() {
                if clusters[i].position.distance(clusters[j].position) < MIN_ANCHOR_SPACING {
                    let c = clusters.remove(j);
                    clusters[i].absorb(c);
                    merged = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !merged {
            break;
        }
    }
    let anchors = clusters
        .into_iter()
        .map(|c| {
            if c.zero {
                Anchor::zero(c.position)
            } else {
                Anchor::motion(c.position, c.vector)
            }
        })
        .collect();
    SparseFlow { anchors }
}

pub const DEFAULT_ATTENUATION_SPACING: f64 = 12.0;

/// Zero anchors on the boundary of the mask dilated by `spacing`, greedily
/// subsampled (raster order) so no two are closer than `spacing`. Boundary
/// pixels lie inside the image by construction; candidates colliding with an
/// existing anchor are skipped.
pub fn add_attenuation_anchors(flow: &SparseFlow, mask: &BinaryMask, spacing: f64) -> Result<SparseFlow> {
    if !(spacing.is_finite() && spacing >= 1.0) {
        return Err(Error::invalid("attenuation spacing must be at least 1 px"));
    }
    let ring = ring_positions(mask, spacing);
    let mut anchors = flow.anchors().to_vec();
    for p in ring {
        if anchors.iter().all(|a| a.position.distance(p) >= MIN_ANCHOR_SPACING) {
            anchors.push(Anchor::zero(p));
        }
    }
    SparseFlow::new(anchors)
}

pub(crate) fn ring_positions(mask: &BinaryMask, spacing: f64) -> Vec<Vec2> {
    let dilated = mask.dilate(spacing);
    let (w, h) = mask.dimensions();
    let mut picked: Vec<Vec2> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !dilated.is_boundary(x, y) {
                continue;
            }
            let p = Vec2::new(x as f64, y as f64);
            if picked.iter().all(|q| q.distance(p) >= spacing) {
                picked.push(p);
            }
        }
    }
    picked
}
