use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use endless_loop::crf::{
    build_labels, compatibility, compute_unary, init_guess_field, meanfield_solve, meanfield_solve_traced, LabelParams,
    LabelSet, MeanFieldParams, UnaryVolume, DEFAULT_LAMBDA,
};
use endless_loop::descriptor::{compute_descriptors, descriptor_distance, DescriptorBackend};
use endless_loop::flowfield::rbf_fit_points;
use endless_loop::raster::{BinaryMask, RasterImage, VectorField};
use endless_loop::renderer::{warp, ExtendedTexture};
use endless_loop::repeat1d::{min_cost_path, OffsetSeedSet, SelfSimMatrix};
use endless_loop::Vec2;

fn stripes(w: usize, h: usize, period: f64) -> RasterImage {
    RasterImage::from_fn(w, h, |x, _| {
        let v = (0.5 + 0.4 * (2.0 * PI * x as f64 / period).sin()) as f32;
        [v, 0.8 * v + 0.1, 1.0 - v]
    })
    .unwrap()
}

fn random_image(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RasterImage::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
}

fn symmetric(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random::<f64>();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

fn random_unary(pixels: &[(usize, usize)], w: usize, h: usize, labels: usize, seed: u64) -> UnaryVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = (0..pixels.len() * labels).map(|_| rng.random::<f64>()).collect();
    UnaryVolume::new(w, h, pixels.to_vec(), labels, costs).unwrap()
}

fn fan(labels: usize) -> LabelSet {
    let v = (0..labels)
        .map(|i| {
            let a = i as f64 * 0.7 / labels as f64;
            Vec2::new(a.cos(), a.sin()) * (10.0 + i as f64)
        })
        .collect();
    LabelSet::from_vectors(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_path_scaling_invariance(n in 8usize..28, e in 1usize..4, seed in any::<u64>(), c in 0.01f64..100.0) {
        let d = symmetric(n, seed);
        let m = SelfSimMatrix::from_distances(n, e, d.clone()).unwrap();
        let scaled = SelfSimMatrix::from_distances(n, e, d.iter().map(|v| v * c).collect()).unwrap();
        let (a, b) = (min_cost_path(&m).unwrap(), min_cost_path(&scaled).unwrap());
        prop_assert_eq!(&a.points, &b.points);
        prop_assert!((b.total_cost - c * a.total_cost).abs() <= 1e-9 * b.total_cost.abs().max(1.0));
    }

    #[test]
    fn dp_path_is_feasible_and_costed(n in 8usize..28, e in 1usize..4, seed in any::<u64>()) {
        let m = SelfSimMatrix::from_distances(n, e, symmetric(n, seed)).unwrap();
        let p = min_cost_path(&m).unwrap();
        prop_assert!(p.validate(e).is_ok());
        prop_assert!(p.points.iter().all(|&(i, j)| !m.is_excluded(i, j)));
        let sum: f64 = p.points.iter().map(|&(i, j)| m.value(i, j)).sum();
        prop_assert!((sum - p.total_cost).abs() <= 1e-9 * sum.max(1.0));
        let &(i, j) = p.points.last().unwrap();
        prop_assert!(i == n - 1 || j == n - 1);
    }

    #[test]
    fn patch_descriptors_unit_or_zero(seed in any::<u64>(), w in 8usize..20, h in 8usize..20) {
        let f = compute_descriptors(&random_image(w, h, seed), &DescriptorBackend::default()).unwrap();
        for y in 0..h {
            for x in 0..w {
                let n: f64 = f.at(x, y).iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
                prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-5, "norm {}", n);
            }
        }
    }

    #[test]
    fn label_compatibility_is_rooted_cosine(ax in -30f64..30.0, ay in -30f64..30.0, bx in -30f64..30.0, by in -30f64..30.0) {
        let (a, b) = (Vec2::new(ax, ay), Vec2::new(bx, by));
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let c = compatibility(a, b);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!((c - compatibility(b, a)).abs() < 1e-12);
        let cos = a.dot(b) / (a.norm() * b.norm());
        prop_assert!((c - cos.max(0.0).sqrt()).abs() < 1e-9);
        prop_assert!((compatibility(a, a * 2.5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rbf_reproduces_anchors(seed in any::<u64>(), count in 4usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts: Vec<Vec2> = Vec::new();
        while pts.len() < count {
            let p = Vec2::new(rng.random_range(0..80) as f64, rng.random_range(0..60) as f64);
            if pts.iter().all(|q| (*q - p).norm() >= 1.0) {
                pts.push(p);
            }
        }
        let vals: Vec<Vec2> = pts.iter().map(|_| Vec2::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))).collect();
        let model = rbf_fit_points(&pts, &vals).unwrap();
        for (p, v) in pts.iter().zip(&vals) {
            prop_assert!((model.eval(*p) - *v).norm() < 1e-6);
        }
    }

    #[test]
    fn rbf_has_linear_precision(seed in any::<u64>(), a in prop::array::uniform6(-2.0f64..2.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let affine = |p: Vec2| Vec2::new(a[0] * p.x + a[1] * p.y + a[2], a[3] * p.x + a[4] * p.y + a[5]);
        let pts: Vec<Vec2> = (0..12).map(|k| Vec2::new((k % 4) as f64 * 15.0 + rng.random::<f64>(), (k / 4) as f64 * 15.0)).collect();
        let vals: Vec<Vec2> = pts.iter().map(|&p| affine(p)).collect();
        let model = rbf_fit_points(&pts, &vals).unwrap();
        for y in (0..40).step_by(3) {
            for x in (0..60).step_by(3) {
                let p = Vec2::new(x as f64, y as f64);
                prop_assert!((model.eval(p) - affine(p)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_field_warp_copies_source(seed in any::<u64>(), t in -1.0f64..1.0) {
        let img = random_image(17, 11, seed);
        let tex = ExtendedTexture::passthrough(&img);
        let out = warp(&tex, &VectorField::zeros(17, 11), t).unwrap();
        prop_assert_eq!(out.data(), img.data());
    }

    #[test]
    fn meanfield_marginals_and_energy(seed in any::<u64>(), labels in 2usize..9, w in 0.0f64..3.0) {
        let mask = BinaryMask::from_fn(30, 20, |x, y| (x as i64 - 15).pow(2) + (y as i64 - 10).pow(2) < 90).unwrap();
        let pixels: Vec<(usize, usize)> = mask.active_pixels().collect();
        let unary = random_unary(&pixels, 30, 20, labels, seed);
        let params = MeanFieldParams { pairwise_weight: w, ..MeanFieldParams::default() };
        let (a, trace) = meanfield_solve_traced(&unary, &fan(labels), &mask, &params).unwrap();
        prop_assert_eq!(a.labels.len(), pixels.len());
        for (&l, &q) in a.labels.iter().zip(&a.confidence) {
            prop_assert!(l < labels);
            prop_assert!(q >= 1.0 / labels as f64 - 1e-9 && q <= 1.0 + 1e-9);
        }
        prop_assert!(trace.free_energy.iter().all(|e| e.is_finite()));
    }
}

#[test]
fn free_energy_does_not_increase_on_stripes() {
    let (w, h) = (160, 100);
    let img = stripes(w, h, 20.0);
    let mask = BinaryMask::rect(w, h, 15, 15, 145, 85).unwrap();
    let desc = compute_descriptors(&img, &DescriptorBackend::default()).unwrap();
    let seeds = OffsetSeedSet { offsets: vec![20, 20, 20, 19, 21, 24], positions: Vec::new(), direction: Vec2::new(1.0, 0.0) };
    let labels = build_labels(&seeds, seeds.direction, &LabelParams::default()).unwrap();
    let guess = init_guess_field(&mask, Vec2::new(15.0, 50.0), seeds.direction, &[20.0], 1.0).unwrap();
    let unary = compute_unary(&desc, &labels, &guess, &mask, DEFAULT_LAMBDA).unwrap();
    let (_, trace) = meanfield_solve_traced(&unary, &labels, &mask, &MeanFieldParams::default()).unwrap();
    assert!(trace.free_energy.len() >= 2);
    for pair in trace.free_energy.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-4 * pair[0].abs(), "{:?}", trace.free_energy);
    }
}

#[test]
fn uniform_costs_without_pairwise_pick_first_label() {
    let mask = BinaryMask::rect(20, 12, 2, 2, 18, 10).unwrap();
    let pixels: Vec<(usize, usize)> = mask.active_pixels().collect();
    let unary = UnaryVolume::new(20, 12, pixels.clone(), 5, vec![0.3; pixels.len() * 5]).unwrap();
    let params = MeanFieldParams { pairwise_weight: 0.0, ..MeanFieldParams::default() };
    let a = meanfield_solve(&unary, &fan(5), &mask, &params).unwrap();
    assert!(a.labels.iter().all(|&l| l == 0));
}

#[test]
fn components_are_solved_independently() {
    let (w, h) = (60, 30);
    let left = BinaryMask::rect(w, h, 2, 2, 26, 28).unwrap();
    let right = BinaryMask::rect(w, h, 34, 2, 58, 28).unwrap();
    let both = left.or(&right).unwrap();
    let labels = fan(6);
    let params = MeanFieldParams::default();
    let all: Vec<(usize, usize)> = both.active_pixels().collect();
    let unary = random_unary(&all, w, h, 6, 9);
    let joint = meanfield_solve(&unary, &labels, &both, &params).unwrap();
    for part in [&left, &right] {
        let px: Vec<(usize, usize)> = part.active_pixels().collect();
        let costs: Vec<f64> = px
            .iter()
            .flat_map(|p| unary.costs(all.iter().position(|q| q == p).unwrap()).to_vec())
            .collect();
        let sub = UnaryVolume::new(w, h, px.clone(), 6, costs).unwrap();
        let alone = meanfield_solve(&sub, &labels, part, &params).unwrap();
        for (p, l) in px.iter().zip(&alone.labels) {
            let k = joint.pixels.iter().position(|q| q == p).unwrap();
            assert_eq!(joint.labels[k], *l);
        }
    }
}

#[test]
fn periodic_descriptors_match_across_one_period() {
    let img = stripes(120, 40, 20.0);
    let f = compute_descriptors(&img, &DescriptorBackend::default()).unwrap();
    for y in 8..32 {
        for x in 8..90 {
            assert!(descriptor_distance(f.at(x, y), f.at(x + 20, y)).unwrap() < 1e-8);
        }
    }
}
