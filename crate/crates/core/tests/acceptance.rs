//! Acceptance suite: one line per criterion.
//!
//! Run with `cargo test -p endless-loop --test acceptance`. Failures are
//! reported but only fail the process when `ACCEPTANCE_STRICT=1` is set.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use endless_loop::crf::{
    build_labels, compute_unary, init_guess_field, meanfield_solve, LabelAssignment, LabelParams, LabelSet, MeanFieldParams,
    DEFAULT_LAMBDA,
};
use endless_loop::autodirect::{suggest_directions, DEFAULT_MAX_DIRECTIONS};
use endless_loop::descriptor::{compute_descriptors, DescriptorBackend};
use endless_loop::flowfield::{invert_sparse, rbf_fit, rbf_fit_points, Anchor, SparseFlow};
use endless_loop::pipeline::{run_on, DirectionSpec, LoopResult, ProjectConfig, SolverMode};
use endless_loop::raster::{sample_band, BinaryMask, RasterImage, VectorField};
use endless_loop::repeat1d::{detect_repetition, OffsetSeedSet, min_cost_path, min_cost_path_until, SelfSimMatrix};
use endless_loop::Vec2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn stripes(w: usize, h: usize, period: f64) -> RasterImage {
    RasterImage::from_fn(w, h, |x, _| {
        let v = 0.5 + 0.4 * (2.0 * PI * x as f64 / period).sin();
        [v as f32, (0.8 * v + 0.1) as f32, (1.0 - v) as f32]
    })
    .unwrap()
}

fn config(frames: usize) -> ProjectConfig {
    ProjectConfig { frames, direction: DirectionSpec::Angle { degrees: 0.0 }, ..ProjectConfig::default() }
}

fn run(image: &RasterImage, mask: &BinaryMask, cfg: &ProjectConfig) -> Result<LoopResult, String> {
    run_on(image, mask, cfg, None).map_err(|e| e.to_string())
}

/// Median |offset| of the DP path along the mask's central row.
fn median_period(image: &RasterImage, x0: usize, x1: usize, y: usize) -> Result<i64, String> {
    let slice = sample_band(image, Vec2::new(x0 as f64, y as f64), Vec2::new(1.0, 0.0), x1 - x0, 17).map_err(|e| e.to_string())?;
    let rep = detect_repetition(&slice, 8).map_err(|e| e.to_string())?;
    rep.seeds.median_magnitude().ok_or_else(|| "no offsets".into())
}

fn a1_period_recovery() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for p in [12.0, 20.0, 33.0] {
        let img = stripes(320, 120, p);
        let t = Instant::now();
        let m = median_period(&img, 20, 300, 60);
        let secs = t.elapsed().as_secs_f64();
        match m {
            Ok(m) => {
                let ok = (m as f64 - p).abs() <= 1.0 && secs < 1.0;
                pass &= ok;
                details.push(format!("P={p}: {m} in {secs:.3}s"));
            }
            Err(e) => {
                pass = false;
                details.push(format!("P={p}: {e}"));
            }
        }
    }
    outcome(pass, details.join(", "))
}

/// Exhaustive search over feasible paths ending where `is_end` holds (pruned
/// only by the running best, which is exact for nonnegative costs).
fn brute_force(m: &SelfSimMatrix, is_end: &dyn Fn(usize, usize) -> bool) -> f64 {
    let n = m.len();
    let e = m.exclusion();
    // last move: 0 start/diag, 1 down, 2 right
    fn go(m: &SelfSimMatrix, is_end: &dyn Fn(usize, usize) -> bool, i: usize, j: usize, last: u8, cost: f64, best: &mut f64) {
        if cost >= *best {
            return;
        }
        if is_end(i, j) {
            *best = cost;
        }
        let n = m.len();
        let step = |ni: usize, nj: usize, mv: u8, best: &mut f64| {
            if ni < n && nj < n && !m.is_excluded(ni, nj) {
                go(m, is_end, ni, nj, mv, cost + m.value(ni, nj), best);
            }
        };
        step(i + 1, j + 1, 0, best);
        if last != 1 {
            step(i + 1, j, 1, best);
        }
        if last != 2 {
            step(i, j + 1, 2, best);
        }
    }
    let mut best = f64::INFINITY;
    for (i, j) in [(0, e + 1), (e + 1, 0)] {
        if i < n && j < n {
            go(m, is_end, i, j, 0, m.value(i, j), &mut best);
        }
    }
    best
}

fn a2_dp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = Instant::now();
    let mut mismatches = 0;
    let mut worst = String::new();
    for case in 0..100 {
        let e = if case % 2 == 0 { 2 } else { 3 };
        let n = rng.random_range(2 * e + 2..=20);
        let integer = case % 4 < 2;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = if integer { rng.random_range(0..4) as f64 } else { rng.random::<f64>() };
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let m = SelfSimMatrix::from_distances(n, e, dist).unwrap();
        let end = n - 1 - n / 4;
        let dp = min_cost_path(&m).map(|p| p.total_cost).unwrap_or(f64::INFINITY);
        let dp_until = min_cost_path_until(&m, end).map(|p| p.total_cost).unwrap_or(f64::INFINITY);
        let bf = brute_force(&m, &|i, j| i == n - 1 || j == n - 1);
        let bf_until = brute_force(&m, &|i, j| (j > i && i == end) || (i > j && j == end));
        if dp != bf || dp_until != bf_until {
            mismatches += 1;
            worst = format!("; case {case} n={n} e={e}: {dp} vs {bf}, {dp_until} vs {bf_until}");
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 30.0,
        format!("{mismatches} mismatches in 100 matrices (both end rules), {secs:.2}s{worst}"),
    )
}

fn salt_and_pepper(img: &RasterImage, fraction: f64, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    let (w, h) = img.dimensions();
    for y in 0..h {
        for x in 0..w {
            if rng.random::<f64>() < fraction {
                let v = if rng.random::<bool>() { 1.0 } else { 0.0 };
                out.set_pixel(x, y, [v; 3]);
            }
        }
    }
    out
}

fn interior_accuracy(assignment: &LabelAssignment, labels: &LabelSet, target: Vec2) -> (f64, usize) {
    let (mut good, mut total) = (0usize, 0usize);
    for (&(x, y), &l) in assignment.pixels.iter().zip(&assignment.labels) {
        // interior: at least 8 px from the mask edge
        if !(28..212).contains(&x) || !(28..132).contains(&y) {
            continue;
        }
        total += 1;
        let v = labels.get(l);
        let cos = v.dot(target) / (v.norm() * target.norm()).max(1e-12);
        if (v.norm() - target.norm()).abs() <= 1.0 && cos >= 5f64.to_radians().cos() {
            good += 1;
        }
    }
    (good as f64 / total.max(1) as f64, total)
}

/// End to end on the noisy image; returns the outcome and an informational
/// line for the CRF alone on the single-length label set.
fn a3_crf_accuracy() -> (Outcome, String) {
    let (w, h) = (240, 160);
    let img = salt_and_pepper(&stripes(w, h, 20.0), 0.10, 3);
    let mask = BinaryMask::rect(w, h, 20, 20, 220, 140).unwrap();
    let target = Vec2::new(20.0, 0.0);
    let r = match run(&img, &mask, &config(2)) {
        Ok(r) => r,
        Err(e) => return (outcome(false, e), String::new()),
    };
    let cell = &r.cells[0];
    let (frac, total) = interior_accuracy(&cell.assignment, &cell.labels, target);
    let lengths: std::collections::BTreeSet<i64> = cell.labels.vectors().iter().map(|v| v.norm().round() as i64).collect();
    let main = outcome(
        frac >= 0.95,
        format!("{:.2}% of {total} interior pixels within 1 px / 5 deg (label lengths {lengths:?})", 100.0 * frac),
    );

    let info = (|| -> endless_loop::Result<String> {
        let desc = compute_descriptors(&img, &DescriptorBackend::default())?;
        let seeds = OffsetSeedSet { offsets: vec![20; 8], positions: Vec::new(), direction: Vec2::new(1.0, 0.0) };
        let labels = build_labels(&seeds, seeds.direction, &LabelParams::default())?;
        let guess = init_guess_field(&mask, Vec2::new(20.0, 80.0), seeds.direction, &[20.0], 1.0)?;
        let unary = compute_unary(&desc, &labels, &guess, &mask, DEFAULT_LAMBDA)?;
        let a = meanfield_solve(&unary, &labels, &mask, &MeanFieldParams::default())?;
        let (f, n) = interior_accuracy(&a, &labels, target);
        Ok(format!("CRF alone, labels {{(20,0) +/- rotations}}: {:.2}% of {n} interior pixels", 100.0 * f))
    })()
    .unwrap_or_else(|e| e.to_string());
    (main, info)
}

fn a4_ablation() -> Outcome {
    let img = stripes(200, 120, 20.0);
    let mask = BinaryMask::rect(200, 120, 20, 20, 180, 100).unwrap();
    let unary = ProjectConfig { mode: SolverMode::UnaryOnly, ..config(6) };
    let mut crf0 = config(6);
    crf0.meanfield.pairwise_weight = 0.0;
    let (a, b) = match (run(&img, &mask, &unary), run(&img, &mask, &crf0)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let same_labels = a.cells.iter().zip(&b.cells).all(|(x, y)| x.assignment.labels == y.assignment.labels);
    let same_frames = a.frames.frames.iter().zip(&b.frames.frames).all(|(x, y)| x.data() == y.data());
    let same_fields = a.forward.data() == b.forward.data() && a.backward.data() == b.backward.data();
    outcome(
        same_labels && same_frames && same_fields,
        format!("labels equal: {same_labels}, fields equal: {same_fields}, frames bit-identical: {same_frames}"),
    )
}

fn a5_rbf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points: Vec<Vec2> = Vec::new();
    while points.len() < 80 {
        let p = Vec2::new(rng.random_range(0.0..199.0), rng.random_range(0.0..149.0));
        if points.iter().all(|q| q.distance(p) >= 2.0) {
            points.push(p);
        }
    }
    let values: Vec<Vec2> = points.iter().map(|p| Vec2::new((p.x / 17.0).sin() * 5.0, (p.y / 23.0).cos() * 3.0)).collect();
    let model = match rbf_fit_points(&points, &values) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let exact = points.iter().zip(&values).map(|(p, v)| model.eval(*p).distance(*v)).fold(0.0, f64::max);

    let affine = |p: Vec2| Vec2::new(0.03 * p.x - 0.02 * p.y + 4.0, 0.01 * p.x + 0.05 * p.y - 2.0);
    let avals: Vec<Vec2> = points.iter().map(|p| affine(*p)).collect();
    let amodel = rbf_fit_points(&points, &avals).unwrap();
    let dense = amodel.densify(200, 150);
    let mut linear: f64 = 0.0;
    for y in 0..150 {
        for x in 0..200 {
            linear = linear.max(dense.get(x, y).distance(affine(Vec2::new(x as f64, y as f64))));
        }
    }
    outcome(exact <= 1e-6 && linear <= 1e-6, format!("anchor error {exact:.2e} px, affine error {linear:.2e} px"))
}

fn a6_inverse() -> Outcome {
    let field = |p: Vec2| Vec2::new(6.0 + 2.0 * (p.y / 30.0).sin(), 1.5 * (p.x / 40.0).cos());
    let mut anchors = Vec::new();
    for y in (8..150).step_by(10) {
        for x in (8..200).step_by(10) {
            let p = Vec2::new(x as f64, y as f64);
            anchors.push(Anchor::motion(p, field(p)));
        }
    }
    let flow = SparseFlow::new(anchors).unwrap();
    let (f1, f2) = match (rbf_fit(&flow), rbf_fit(&invert_sparse(&flow))) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let n = flow.len();
    let good = flow
        .anchors()
        .iter()
        .filter(|a| {
            let v = f1.eval(a.position);
            (f2.eval(a.position + v) + v).norm() <= 0.5
        })
        .count();
    let frac = good as f64 / n as f64;
    outcome(frac >= 0.9, format!("{:.1}% of {n} anchors within 0.5 px", 100.0 * frac))
}

fn mean_abs(a: &RasterImage, b: &RasterImage, mask: &BinaryMask) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for (x, y) in mask.active_pixels() {
        let (p, q) = (a.pixel(x, y), b.pixel(x, y));
        s += (0..3).map(|c| (p[c] - q[c]).abs() as f64).sum::<f64>();
        n += 3;
    }
    s / n.max(1) as f64
}

fn a7_closure(r: &LoopResult, img: &RasterImage, mask: &BinaryMask) -> Outcome {
    let f = &r.frames.frames;
    let k = f.len();
    let consecutive: f64 = (0..k - 1).map(|i| mean_abs(&f[i], &f[i + 1], &r.support)).sum::<f64>() / (k - 1) as f64;
    let wrap = mean_abs(&f[k - 1], &f[0], &r.support);
    let (w, h) = img.dimensions();
    let mut untouched = true;
    for fr in f {
        for y in 0..h {
            for x in 0..w {
                if !mask.get(x, y) && fr.pixel(x, y) != img.pixel(x, y) {
                    untouched = false;
                }
            }
        }
    }
    outcome(
        k == 80 && wrap <= 2.0 * consecutive && untouched,
        format!("{k} frames, wrap {wrap:.4} vs mean step {consecutive:.4}, unmasked bit-identical: {untouched}"),
    )
}

/// Shift `s` maximizing the correlation of `b` with `a` shifted right by `s`.
fn best_shift(a: &[f64], b: &[f64], max: isize) -> isize {
    let n = a.len() as isize;
    let mean_a = a.iter().sum::<f64>() / a.len() as f64;
    let mean_b = b.iter().sum::<f64>() / b.len() as f64;
    let mut best = (f64::NEG_INFINITY, 0);
    for s in -max..=max {
        let mut c = 0.0;
        for i in max..n - max {
            c += (a[(i - s) as usize] - mean_a) * (b[i as usize] - mean_b);
        }
        if c > best.0 {
            best = (c, s);
        }
    }
    best.1
}

fn row(img: &RasterImage, y: usize, x0: usize, x1: usize) -> Vec<f64> {
    (x0..x1).map(|x| img.pixel(x, y)[0] as f64).collect()
}

fn a8_direction(forward: &LoopResult, img: &RasterImage, mask: &BinaryMask) -> Outcome {
    let mut cfg = config(8);
    cfg.direction = DirectionSpec::Angle { degrees: 180.0 };
    let backward = match run(img, mask, &cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    // a quarter loop moves a period-20 pattern 5 px
    let s_fwd = best_shift(&row(&img.clone(), 80, 40, 200), &row(&forward.frames.frames[20], 80, 40, 200), 9);
    let s_bwd = best_shift(&row(img, 80, 40, 200), &row(&backward.frames.frames[2], 80, 40, 200), 9);
    outcome(s_fwd > 0 && s_bwd < 0, format!("0 deg drifts {s_fwd:+} px, 180 deg drifts {s_bwd:+} px after a quarter loop"))
}

fn perspective(img: &RasterImage, strength: f64) -> RasterImage {
    let (w, h) = img.dimensions();
    let (wf, hf) = (w as f64, h as f64);
    RasterImage::from_fn(w, h, |x, y| {
        // top edge pinched inward by `strength * w` at each corner
        let t = 1.0 - y as f64 / (hf - 1.0);
        let inset = strength * wf * t;
        let u = inset + x as f64 / (wf - 1.0) * (wf - 1.0 - 2.0 * inset);
        let c = img.bilinear_sample(Vec2::new(u, y as f64));
        [c[0], c[1], c[2]]
    })
    .unwrap()
}

fn a9_noise() -> (Outcome, String) {
    let clean = stripes(320, 120, 20.0);
    let normal = Normal::new(0.0, 10.0 / 255.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noisy = RasterImage::from_fn(320, 120, |x, y| {
        let c = clean.pixel(x, y);
        [0, 1, 2].map(|i| (c[i] as f64 + normal.sample(&mut rng)) as f32)
    })
    .unwrap();
    let o = match median_period(&noisy, 20, 300, 60) {
        Ok(m) => outcome((m - 20).abs() <= 2, format!("sigma 10/255: recovered {m} for P=20")),
        Err(e) => outcome(false, e),
    };
    let warped = perspective(&clean, 0.15);
    let info = match median_period(&warped, 20, 300, 60) {
        Ok(m) => format!("perspective 15%: recovered {m} (allowed to fail)"),
        Err(e) => format!("perspective 15%: {e} (allowed to fail)"),
    };
    (o, info)
}

fn a10_runtime() -> Outcome {
    let (w, h) = (640, 420);
    let img = stripes(w, h, 36.0);
    let mask = BinaryMask::rect(w, h, 40, 60, 600, 360).unwrap();
    let cfg = ProjectConfig { threads: Some(1), ..config(80) };
    let t = Instant::now();
    let r = run(&img, &mask, &cfg);
    let single = t.elapsed().as_secs_f64();
    let r = match r {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let (par_ok, par) = if cores >= 4 {
        let cfg = ProjectConfig { threads: Some(4), ..config(80) };
        let t = Instant::now();
        let ok = run(&img, &mask, &cfg).is_ok();
        let p = t.elapsed().as_secs_f64();
        (ok && p < single, format!("4 threads {p:.2}s"))
    } else {
        (true, format!("parallel clause not measured: {cores} core(s) available"))
    };
    outcome(
        single < 30.0 && par_ok,
        format!("working size {:?}, single-threaded {single:.2}s; {par}", r.diagnostics.working_size),
    )
}

fn lattice(w: usize, h: usize, period: usize) -> RasterImage {
    // Distinct motif per row band, repeated only along x.
    let band = 28;
    RasterImage::from_fn(w, h, |x, y| {
        let r = y / band;
        let (cx, cy) = (x % period, y % band);
        let half = 3 + (r * 5) % 7;
        let inside = cx.abs_diff(period / 2) <= half && cy.abs_diff(band / 2) <= (2 + r % 4);
        let tone = [0.2 + 0.13 * (r % 5) as f32, 0.9 - 0.11 * (r % 6) as f32, 0.3 + 0.2 * (r % 3) as f32];
        if inside { tone } else { [0.5, 0.5, 0.5] }
    })
    .unwrap()
}

fn transpose(img: &RasterImage) -> RasterImage {
    let (w, h) = img.dimensions();
    RasterImage::from_fn(h, w, |x, y| img.pixel(y, x)).unwrap()
}

fn top_direction(img: &RasterImage) -> Result<f64, String> {
    let desc = compute_descriptors(img, &DescriptorBackend::default()).map_err(|e| e.to_string())?;
    let vote = suggest_directions(img, &desc, 200, DEFAULT_MAX_DIRECTIONS).map_err(|e| e.to_string())?;
    vote.winners.first().map(|w| w.angle_deg).ok_or_else(|| "no suggestion".into())
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

fn a11_suggestion() -> Outcome {
    let img = lattice(240, 168, 24);
    match (top_direction(&img), top_direction(&transpose(&img))) {
        (Ok(a), Ok(b)) => outcome(
            angle_gap(a, 0.0) <= 10.0 && angle_gap(b, 90.0) <= 10.0,
            format!("lattice {a:.1} deg, rotated {b:.1} deg"),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn ring_of(support: &BinaryMask) -> Vec<(usize, usize)> {
    support.active_pixels().filter(|&(x, y)| support.is_boundary(x, y)).collect()
}

fn mean_mag(f: &VectorField, px: impl Iterator<Item = (usize, usize)>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for (x, y) in px {
        s += f.get(x, y).norm();
        n += 1;
    }
    s / n.max(1) as f64
}

fn a12_attenuation() -> Outcome {
    let (w, h) = (240, 180);
    let img = stripes(w, h, 20.0);
    let mask = BinaryMask::rect(w, h, 50, 50, 190, 130).unwrap();
    let soft = ProjectConfig { soft_boundary: true, ..config(4) };
    let (s, hard) = match (run(&img, &mask, &soft), run(&img, &mask, &config(4))) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let interior = |x: usize, y: usize| (60..180).contains(&x) && (60..120).contains(&y);
    let soft_interior = mean_mag(&s.forward, mask.active_pixels().filter(|&(x, y)| interior(x, y)));
    let soft_ring = mean_mag(&s.forward, ring_of(&s.support).into_iter());
    let edge = ring_of(&mask);
    let hard_interior = mean_mag(&hard.forward, mask.active_pixels().filter(|&(x, y)| interior(x, y)));
    let hard_edge_min = edge.iter().map(|&(x, y)| hard.forward.get(x, y).norm()).fold(f64::INFINITY, f64::min);
    let ratio = soft_ring / soft_interior.max(1e-12);
    outcome(
        ratio < 0.10 && hard_edge_min > 0.0,
        format!(
            "soft ring {soft_ring:.3} vs interior {soft_interior:.3} ({:.1}%); hard edge min {hard_edge_min:.3} vs interior {hard_interior:.3}",
            100.0 * ratio
        ),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        if !o.pass {
            failed += 1;
        }
        println!("{id:<4} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };

    report("A1", "period recovery", a1_period_recovery());
    report("A2", "DP oracle equivalence", a2_dp_oracle());
    let (a3, info) = a3_crf_accuracy();
    report("A3", "CRF label accuracy", a3);
    println!("     {info}");
    report("A4", "ablation equivalence", a4_ablation());
    report("A5", "RBF exactness and linear precision", a5_rbf());
    report("A6", "inverse composition", a6_inverse());

    let (w, h) = (240, 160);
    let img = stripes(w, h, 20.0);
    let mask = BinaryMask::rect(w, h, 30, 30, 210, 130).unwrap();
    match run(&img, &mask, &config(80)) {
        Ok(r) => {
            report("A7", "loop closure", a7_closure(&r, &img, &mask));
            report("A8", "motion direction", a8_direction(&r, &img, &mask));
        }
        Err(e) => {
            report("A7", "loop closure", outcome(false, e.clone()));
            report("A8", "motion direction", outcome(false, e));
        }
    }
    let (a9, info) = a9_noise();
    report("A9", "noise robustness", a9);
    println!("     {info}");
    report("A10", "runtime envelope", a10_runtime());
    report("A11", "direction suggestion", a11_suggestion());
    report("A12", "attenuation", a12_attenuation());

    println!("{} of 12 criteria failed ({:.1}s)", failed, t.elapsed().as_secs_f64());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
