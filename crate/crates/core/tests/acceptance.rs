//! End-to-end acceptance suite. Each test prints one `criterion N: PASS` line
//! (with the measured values) before asserting, so a failing run still shows
//! which checks held.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfaffine::affinity::{affinity_estimate, solve_sk};
use selfaffine::attractor::{
    default_anchor, homogeneous_points, inhomogeneous_points, rasterize,
};
use selfaffine::boxdim::{curve_from_points, estimate_dims};
use selfaffine::config::RunConfig;
use selfaffine::geom::{Ball, CondensationSet, Primitive};
use selfaffine::ifs::{Ifs, System, Word};
use selfaffine::matrix::{phi_of_spectrum, singular_values, AffineMap, Matrix};
use selfaffine::verify::{
    kappa_condition, projection_measure_min, verify_sandwich, VerifyOpts,
};

fn config_path(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn load_config(name: &str) -> RunConfig {
    let text = std::fs::read_to_string(config_path(name)).unwrap();
    RunConfig::parse(&text).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selfaffine"))
}

/// Closed-form k = 1 root for the bundled shear pair: both maps share
/// alpha_1 = (1+sqrt(5))/4, alpha_2 = (sqrt(5)-1)/4, so the level-1 pressure
/// equation 2 alpha_1 alpha_2^{s-1} = 1 solves to
/// s_1 = 1 + ln(2 alpha_1) / (-ln alpha_2).
fn shear_s1() -> f64 {
    let a1 = (1.0 + 5f64.sqrt()) / 4.0;
    let a2 = (5f64.sqrt() - 1.0) / 4.0;
    1.0 + (2.0 * a1).ln() / -a2.ln()
}

#[test]
fn criterion_1_similarity_oracle() {
    let t0 = Instant::now();
    let sys = load_config("similarity3.cfg").build_system().unwrap();
    let expect = 3f64.ln() / 2f64.ln();
    let mut worst = 0f64;
    for k in 1..=8 {
        let p = solve_sk(&sys.ifs, k, 1 << 24).unwrap();
        worst = worst.max((p.root - expect).abs());
    }
    let elapsed = t0.elapsed();
    let ok = worst < 1e-6 && elapsed.as_secs() < 10;
    println!(
        "criterion 1 (similarity oracle): {} — max |s_k - log3/log2| = {worst:.2e}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_2_paper_affinity() {
    let t0 = Instant::now();
    let sys = load_config("paper_example.cfg").build_system().unwrap();
    let est = affinity_estimate(&sys.ifs, 12, 1 << 26).unwrap();
    let s1 = shear_s1();
    let min_sk = est.upper;
    let mut monotone = true;
    for w in est.sequence.windows(2) {
        if w[1].1 > w[0].1 + 1e-6 {
            monotone = false;
        }
    }
    let elapsed = t0.elapsed();
    let ok = min_sk > 1.0 && min_sk <= s1 + 1e-12 && monotone && elapsed.as_secs() < 120;
    println!(
        "criterion 2 (paper affinity): {} — min_k s_k = {min_sk:.6} in (1, {s1:.6}], monotone = {monotone}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_3_paper_dimensions() {
    let t0 = Instant::now();
    let cfg = load_config("paper_example.cfg");
    let sys = cfg.build_system().unwrap().normalized().unwrap();
    let j_range = (4, 11);
    let delta = 2f64.powi(-11);
    let anchor = default_anchor(&sys).unwrap();

    let pts_c = sys.condensation.discretize(delta).unwrap();
    let pts_f0 = homogeneous_points(&sys, delta, anchor, 1 << 26, 1).unwrap();
    let pts_fc = inhomogeneous_points(&sys, delta, anchor, 1 << 26, 1).unwrap();

    let dim = |pts: &[selfaffine::geom::Pt]| {
        let curve = curve_from_points(pts, &sys.ball, j_range).unwrap();
        estimate_dims(&curve, None).unwrap().ols_slope
    };
    let dim_c = dim(&pts_c);
    let dim_f0 = dim(&pts_f0);
    let dim_fc = dim(&pts_fc);

    let s_upper = affinity_estimate(&sys.ifs, 12, 1 << 26).unwrap().upper;
    let elapsed = t0.elapsed();

    let ok = (0.95..=1.05).contains(&dim_c)
        && (0.0..=0.1).contains(&dim_f0)
        && (dim_fc - s_upper).abs() <= 0.1
        && dim_fc > 1.05
        && elapsed.as_secs() < 300;
    println!(
        "criterion 3 (paper dimensions): {} — dim_C = {dim_c:.4}, dim_F0 = {dim_f0:.4}, dim_FC = {dim_fc:.4}, s_upper = {s_upper:.4}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

fn random_system(rng: &mut ChaCha8Rng) -> System {
    let mut maps = Vec::new();
    for _ in 0..2 {
        loop {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let m = match Matrix::from_rows(&rows) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let sp = singular_values(&m).unwrap();
            if sp.smallest() < 1e-3 {
                continue;
            }
            let scale = 0.6 * rng.gen_range(0.4..1.0) / sp.largest();
            let scaled: Vec<Vec<f64>> =
                rows.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
            let m = Matrix::from_rows(&scaled).unwrap();
            let t: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.3..0.3)).collect();
            maps.push(AffineMap::new(m, t).unwrap());
            break;
        }
    }
    let (a, b) = loop {
        let a: selfaffine::geom::Pt = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), 0.0];
        let b: selfaffine::geom::Pt = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), 0.0];
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        if d > 0.2 {
            break (a, b);
        }
    };
    let c = CondensationSet::new(vec![Primitive::Segment { a, b }], 2).unwrap();
    System::new(Ifs::new(maps).unwrap(), c, None).unwrap()
}

#[test]
fn criterion_4_random_sandwich() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = VerifyOpts {
        j_range: (4, 10),
        window: None,
        tol: 0.15,
        k_max: 6,
        budget: 1 << 26,
        workers: 1,
    };
    let mut passes = 0;
    let mut failures = Vec::new();
    for trial in 0..50 {
        let sys = random_system(&mut rng);
        // an Err here would be an invariant violation, which the criterion
        // forbids; only bound misses are tolerated
        let report = verify_sandwich(&sys, &opts).unwrap();
        if report.lower_bound_ok && report.upper_bound_ok {
            passes += 1;
        } else {
            failures.push((trial, report));
        }
    }
    let elapsed = t0.elapsed();
    for (trial, r) in &failures {
        println!(
            "  trial {trial}: dim_C = {:.3}, dim_F0 = {:.3}, dim_FC = {:.3}, s_upper = {:.3}, window = {:?}",
            r.dim_c.ols_slope, r.dim_f0.ols_slope, r.dim_fc.ols_slope, r.s_upper, r.dim_fc.window
        );
    }
    let ok = passes >= 48;
    println!(
        "criterion 4 (random sandwich): {} — {passes}/50 passed at tol 0.15, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_5_cosc() {
    let t0 = Instant::now();
    let out = tempfile::tempdir().unwrap();
    let status_good = bin()
        .args(["verify", "--cosc", &config_path("paper_example.cfg")])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();

    let translated = load_config("paper_example.cfg");
    let mut bad = translated.clone();
    bad.condensation = vec![Primitive::Circle { center: [0.25, 0.25, 0.0], radius: 0.2 }];
    let bad_path = out.path().join("translated.cfg");
    std::fs::write(&bad_path, bad.serialize()).unwrap();
    let status_bad = bin()
        .args(["verify", "--cosc"])
        .arg(&bad_path)
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();

    let elapsed = t0.elapsed();
    let ok = status_good.code() == Some(0) && status_bad.code() == Some(2) && elapsed.as_secs() < 5;
    println!(
        "criterion 5 (COSC): {} — paper exit {:?}, translated exit {:?}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" },
        status_good.code(),
        status_bad.code()
    );
    assert!(ok);
}

#[test]
fn criterion_6_kappa() {
    let t0 = Instant::now();
    let sys = load_config("paper_example.cfg").build_system().unwrap();
    let deltas: Vec<f64> = (4..=10).map(|j| 2f64.powi(-j)).collect();
    let r = kappa_condition(&sys, &deltas, 1 << 26).unwrap();
    let floor_ok = r.kappa_floor > 0.01;
    let mut octave_ok = true;
    for w in r.per_delta.windows(2) {
        let ratio = w[0].1 / w[1].1;
        if !(0.25..=4.0).contains(&ratio) {
            octave_ok = false;
        }
    }

    let point_sys = System::new(
        sys.ifs.clone(),
        CondensationSet::new(
            vec![Primitive::PointCloud { points: vec![[0.75, 0.75, 0.0]] }],
            2,
        )
        .unwrap(),
        None,
    )
    .unwrap();
    let pr = kappa_condition(&point_sys, &[2f64.powi(-4), 2f64.powi(-10)], 1 << 26).unwrap();
    let decay_ok = pr.per_delta[1].1 < pr.per_delta[0].1 / 10.0;

    let elapsed = t0.elapsed();
    let ok = floor_ok && octave_ok && decay_ok;
    println!(
        "criterion 6 (kappa): {} — floor = {:.4}, octaves bounded = {octave_ok}, point decay = {decay_ok}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" },
        r.kappa_floor
    );
    assert!(ok);
}

#[test]
fn criterion_7_projection() {
    let circle = CondensationSet::new(
        vec![Primitive::Circle { center: [0.75, 0.75, 0.0], radius: 0.2 }],
        2,
    )
    .unwrap();
    let seg = CondensationSet::new(
        vec![Primitive::Segment { a: [0.0; 3], b: [1.0, 0.0, 0.0] }],
        2,
    )
    .unwrap();
    let ell = CondensationSet::new(
        vec![
            Primitive::Segment { a: [0.0; 3], b: [1.0, 0.0, 0.0] },
            Primitive::Segment { a: [0.0; 3], b: [0.0, 1.0, 0.0] },
        ],
        2,
    )
    .unwrap();
    let c = projection_measure_min(&circle, 720).unwrap().min_measure;
    let s = projection_measure_min(&seg, 720).unwrap().min_measure;
    let l = projection_measure_min(&ell, 720).unwrap().min_measure;
    let ok = (c - 0.40).abs() <= 0.02 && s < 0.02 && (l - 0.7071).abs() <= 0.02;
    println!(
        "criterion 7 (projection): {} — circle = {c:.4}, segment = {s:.4}, L-shape = {l:.4}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_8_property_suites() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    // phi^s submultiplicativity on 10^4 random pairs
    let mut phi_ok = true;
    for _ in 0..10_000 {
        let n = if rng.gen_bool(0.5) { 2 } else { 3 };
        let rand_mat = |rng: &mut ChaCha8Rng| loop {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            if let Ok(m) = Matrix::from_rows(&rows) {
                return m;
            }
        };
        let a = rand_mat(&mut rng);
        let b = rand_mat(&mut rng);
        let s = rng.gen_range(0.0..(n as f64 + 1.0));
        let pa = phi_of_spectrum(&singular_values(&a).unwrap(), s).unwrap();
        let pb = phi_of_spectrum(&singular_values(&b).unwrap(), s).unwrap();
        let pab = phi_of_spectrum(&singular_values(&a.mul(&b).unwrap()).unwrap(), s).unwrap();
        // slack covers Gram-matrix cancellation on ill-conditioned products
        if pab > pa * pb * (1.0 + 1e-5) {
            phi_ok = false;
            println!("  submultiplicativity miss: {pab} > {pa} * {pb} at s = {s}");
            break;
        }
    }

    // stopping sandwich on 10^3 random (system, delta) draws
    let mut sandwich_ok = true;
    'outer: for _ in 0..1_000 {
        let sys = random_system(&mut rng);
        let b = sys.ifs.min_alpha_n();
        let m = rng.gen_range(1..=2usize);
        let delta = rng.gen_range(0.02..0.5);
        let stopping = sys.ifs.stopping_set(m, delta, 1 << 22).unwrap();
        for w in &stopping.words {
            let am = sys.ifs.compose_word(w).unwrap().spectrum().unwrap().alpha(m);
            if !(am < delta && am >= b * delta * (1.0 - 1e-12)) {
                println!("  stopping sandwich miss: alpha_{m} = {am}, delta = {delta}, b = {b}");
                sandwich_ok = false;
                break 'outer;
            }
        }
    }

    // prefix-free + partition: every long random word has exactly one prefix
    // in the stopping set
    let mut partition_ok = true;
    'part: for _ in 0..50 {
        let sys = random_system(&mut rng);
        let delta = rng.gen_range(0.05..0.3);
        let m = rng.gen_range(1..=2usize);
        let stopping = sys.ifs.stopping_set(m, delta, 1 << 22).unwrap();
        for i in 0..stopping.words.len() {
            for j in i + 1..stopping.words.len() {
                if stopping.words[i].is_prefix_of(&stopping.words[j]) {
                    println!("  stopping set not prefix-free");
                    partition_ok = false;
                    break 'part;
                }
            }
        }
        for _ in 0..20 {
            let letters: Vec<usize> = (0..64).map(|_| rng.gen_range(0..2usize)).collect();
            let w = Word::from_letters(&letters, 2).unwrap();
            let hits = stopping.words.iter().filter(|s| s.is_prefix_of(&w)).count();
            if hits != 1 {
                println!("  partition miss: {hits} stopping prefixes for one branch");
                partition_ok = false;
                break 'part;
            }
        }
    }

    // CountCurve invariants hold for curves built from fixed point sets
    let mut curve_ok = true;
    let ball = Ball::new([0.0; 3], 0.5, 2).unwrap();
    for _ in 0..100 {
        let pts: Vec<selfaffine::geom::Pt> = (0..rng.gen_range(1..400))
            .map(|_| {
                let r = rng.gen_range(0.0..0.45);
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                [r * t.cos(), r * t.sin(), 0.0]
            })
            .collect();
        if curve_from_points(&pts, &ball, (2, 8)).is_err() {
            curve_ok = false;
            println!("  count curve invariant violated for a fixed point set");
            break;
        }
    }

    // raster determinism across 1/2/8 workers: byte-identical PGM
    let sys = load_config("paper_example.cfg").build_system().unwrap().normalized().unwrap();
    let anchor = default_anchor(&sys).unwrap();
    let delta = 2f64.powi(-8);
    let mut pgms = Vec::new();
    for workers in [1, 2, 8] {
        let pts = inhomogeneous_points(&sys, delta, anchor, 1 << 26, workers).unwrap();
        let grid = rasterize(&pts, delta, &sys.ball).unwrap();
        let mut pgm = Vec::new();
        selfaffine::io::write_pgm(&mut pgm, &grid, &sys.ball).unwrap();
        pgms.push(pgm);
    }
    let raster_ok = pgms[0] == pgms[1] && pgms[0] == pgms[2];

    let elapsed = t0.elapsed();
    let ok = phi_ok && sandwich_ok && partition_ok && curve_ok && raster_ok && elapsed.as_secs() < 120;
    println!(
        "criterion 8 (property suites): {} — phi = {phi_ok}, sandwich = {sandwich_ok}, partition = {partition_ok}, curves = {curve_ok}, raster = {raster_ok}, {elapsed:.1?}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_9_figure_parity() {
    // Non-blocking visual check: the render must exist, be a well-formed PGM
    // at delta = 2^-10, and its occupied-cell count must be consistent with
    // the box counts underlying criterion 3.
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["render", &config_path("paper_example.cfg"), "--jmax", "10"])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    let pgm = std::fs::read(out.path().join("render.pgm")).unwrap();
    let header = b"P5\n1024 1024\n255\n";
    let header_ok = pgm.starts_with(header);
    let occupied = pgm.iter().skip(header.len()).filter(|&&b| b == 255).count();
    // dim_FC ~ 1.4 at this scale puts occupied cells far above a curve's
    // ~2^10 and far below a filled square's 2^20
    let count_ok = occupied > 4_000 && occupied < 400_000;
    let ok = status.code() == Some(0) && header_ok && count_ok;
    println!(
        "criterion 9 (figure parity, non-blocking): {} — {occupied} occupied cells at 1024x1024; \
         structure documented in README (bouquet of nested oval images accumulating at a corner)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}
