use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::repeat1d::OffsetSeedSet;

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelOrigin {
    Seed,
    /// Rotated copy of a seed by `step` angular increments (signed).
    Rotation { step: i32 },
}

/// Candidate displacement vectors for the CRF.
///
/// Every pair has a positive dot product, which keeps the square-rooted cosine
/// compatibility well defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    vectors: Vec<Vec2>,
    provenance: Vec<LabelOrigin>,
}

pub const DEDUP_TOLERANCE: f64 = 0.5;

impl LabelSet {
    /// Validate and deduplicate (vectors within 0.5 px of an earlier one are dropped).
    pub fn new(vectors: Vec<Vec2>, provenance: Vec<LabelOrigin>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid("label set is empty"));
        }
        if vectors.len() != provenance.len() {
            return Err(Error::invalid("label provenance length mismatch"));
        }
        let mut out = LabelSet {
            vectors: Vec::with_capacity(vectors.len()),
            provenance: Vec::with_capacity(vectors.len()),
        };
        for (v, p) in vectors.into_iter().zip(provenance) {
            if !v.is_finite() || v.norm() < 1e-9 {
                return Err(Error::invalid("labels must be finite and non-zero"));
            }
            if out.vectors.iter().any(|u| u.distance(v) <= DEDUP_TOLERANCE) {
                continue;
            }
            out.vectors.push(v);
            out.provenance.push(p);
        }
        for (a, u) in out.vectors.iter().enumerate() {
            for w in &out.vectors[a + 1..] {
                if u.dot(*w) <= 0.0 {
                    return Err(Error::invalid(format!(
                        "labels ({:.2}, {:.2}) and ({:.2}, {:.2}) have non-positive dot product",
                        u.x, u.y, w.x, w.y
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Seed-only convenience constructor.
    pub fn from_vectors(vectors: Vec<Vec2>) -> Result<Self> {
        let prov = vec![LabelOrigin::Seed; vectors.len()];
        Self::new(vectors, prov)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec2] {
        &self.vectors
    }

    pub fn provenance(&self) -> &[LabelOrigin] {
        &self.provenance
    }

    pub fn get(&self, i: usize) -> Vec2 {
        self.vectors[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelParams {
    /// Largest angular deviation from a seed label, degrees.
    pub max_angle_deg: f64,
    /// Rotation steps on each side of the seed.
    pub steps: u32,
    /// Maximum label count.
    pub cap: usize,
}

impl Default for LabelParams {
    fn default() -> Self {
        LabelParams {
            max_angle_deg: 30.0,
            steps: 3,
            cap: 64,
        }
    }
}

/// One label per distinct seed length, oriented along `direction` (times the
/// dominant offset sign), plus rotations by `k * max_angle / steps` for
/// `k in -steps..=steps`. Lengths are admitted most-frequent first while the
/// whole rotation group fits under the cap.
pub fn build_labels(seeds: &OffsetSeedSet, direction: Vec2, params: &LabelParams) -> Result<LabelSet> {
    if seeds.is_empty() {
        return Err(Error::invalid("no seed offsets to build labels from"));
    }
    if !(0.0..45.0).contains(&params.max_angle_deg) {
        return Err(Error::invalid("max label angle must lie in [0, 45) degrees"));
    }
    if params.cap == 0 {
        return Err(Error::invalid("label cap must be positive"));
    }
    let d = direction
        .normalized()
        .ok_or_else(|| Error::invalid("degenerate label direction"))?
        * seeds.dominant_sign();
    let steps = params.steps as i32;
    let increment = if steps > 0 {
        params.max_angle_deg.to_radians() / steps as f64
    } else {
        0.0
    };

    let mut vectors: Vec<Vec2> = Vec::new();
    let mut provenance = Vec::new();
    for (length, _) in seeds.length_histogram() {
        if length == 0 {
            continue;
        }
        let base = d * length as f64;
        let mut group = Vec::new();
        for k in -steps..=steps {
            let v = base.rotated(k as f64 * increment);
            let dup = vectors.iter().chain(group.iter().map(|(v, _)| v)).any(|u| u.distance(v) <= DEDUP_TOLERANCE);
            if !dup {
                let origin = if k == 0 { LabelOrigin::Seed } else { LabelOrigin::Rotation { step: k } };
                group.push((v, origin));
            }
        }
        if vectors.len() + group.len() > params.cap {
            break;
        }
        for (v, o) in group {
            vectors.push(v);
            provenance.push(o);
        }
    }
    if vectors.is_empty() {
        return Err(Error::invalid("label cap too small for a single rotation group"));
    }
    LabelSet::new(vectors, provenance)
}

/// Square-rooted cosine similarity between two labels.
pub fn compatibility(a: Vec2, b: Vec2) -> f64 {
    let cos = a.dot(b) / (a.norm() * b.norm());
    cos.clamp(0.0, 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(vals: &[i64]) -> OffsetSeedSet {
        OffsetSeedSet {
            offsets: vals.to_vec(),
            positions: vals.iter().enumerate().map(|(i, o)| (i, *o)).collect(),
            direction: Vec2::new(1.0, 0.0),
        }
    }

    #[test]
    fn seven_rotations_of_single_length() {
        let l = build_labels(&seeds(&[20, 20, 20]), Vec2::new(1.0, 0.0), &LabelParams::default()).unwrap();
        assert_eq!(l.len(), 7);
        let mut angles: Vec<f64> = l.vectors().iter().map(|v| v.angle().to_degrees()).collect();
        angles.sort_by(f64::total_cmp);
        for (a, e) in angles.iter().zip([-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0]) {
            assert!((a - e).abs() < 1e-9);
        }
        assert!(l.vectors().iter().all(|v| (v.norm() - 20.0).abs() < 1e-9));
    }

    #[test]
    fn zero_angle_gives_single_label() {
        let p = LabelParams { max_angle_deg: 0.0, ..Default::default() };
        let l = build_labels(&seeds(&[20]), Vec2::new(1.0, 0.0), &p).unwrap();
        assert_eq!(l.vectors(), &[Vec2::new(20.0, 0.0)]);
    }

    #[test]
    fn pairwise_cosine_bounded() {
        let l = build_labels(&seeds(&[18, 19, 20, 20, 21, 22, 35]), Vec2::from_degrees(37.0), &LabelParams::default()).unwrap();
        let min_cos = 60f64.to_radians().cos();
        for a in l.vectors() {
            for b in l.vectors() {
                assert!(a.dot(*b) / (a.norm() * b.norm()) >= min_cos - 1e-12);
            }
        }
    }

    #[test]
    fn cap_keeps_most_frequent_lengths() {
        let p = LabelParams { cap: 14, ..Default::default() };
        let l = build_labels(&seeds(&[30, 20, 20, 20, 25, 25]), Vec2::new(1.0, 0.0), &p).unwrap();
        assert_eq!(l.len(), 14);
        let lens: Vec<i64> = l.vectors().iter().map(|v| v.norm().round() as i64).collect();
        assert!(lens.iter().all(|n| *n == 20 || *n == 25));
    }

    #[test]
    fn dominant_negative_sign_flips_orientation() {
        let l = build_labels(&seeds(&[-20, -20, 20]), Vec2::new(1.0, 0.0), &LabelParams { max_angle_deg: 0.0, ..Default::default() }).unwrap();
        assert_eq!(l.vectors(), &[Vec2::new(-20.0, 0.0)]);
    }

    #[test]
    fn rejects_empty_and_opposed() {
        assert!(build_labels(&seeds(&[]), Vec2::new(1.0, 0.0), &LabelParams::default()).is_err());
        assert!(LabelSet::from_vectors(vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.1)]).is_err());
        assert!(LabelSet::from_vectors(vec![Vec2::ZERO]).is_err());
    }

    #[test]
    fn dedup_within_half_pixel() {
        let l = LabelSet::from_vectors(vec![Vec2::new(10.0, 0.0), Vec2::new(10.3, 0.2), Vec2::new(11.0, 0.0)]).unwrap();
        assert_eq!(l.len(), 2);
    }

    #[test]
    fn compatibility_values() {
        let a = Vec2::new(3.0, 4.0);
        assert!((compatibility(a, a) - 1.0).abs() < 1e-12);
        let b = Vec2::from_degrees(60.0);
        assert!((compatibility(Vec2::new(1.0, 0.0), b) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((compatibility(Vec2::new(10.0, 0.0), Vec2::new(30.0, 0.0)) - 1.0).abs() < 1e-12);
    }
}
