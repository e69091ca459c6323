//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::Array2;

use ectkit::ect::linspace;
use ectkit::filtration::{filtration_values, sorted_dimension_values, sublevel_complex};
use ectkit::fixtures::Solid;
use ectkit::optimize::{chamfer_distance, diameter, learn_coordinates, learn_directions, OptimizeConfig};
use ectkit::sampling::{
    generate_double_annulus, generate_noisy_circle, sample_directions_uniform, sample_target_directions, Rng,
    Stream, DEFAULT_NOISE_SIGMA,
};
use ectkit::{ecc, ect, soft_ecc, soft_ect, soft_ect_backward, DirectionSet, GeometricSimplicialComplex, ThresholdGrid};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn platonic_table() -> Outcome {
    let start = Instant::now();
    let expected = [
        (Solid::Tetrahedron, (4, 6, 4)),
        (Solid::Cube, (8, 12, 6)),
        (Solid::Octahedron, (6, 12, 8)),
        (Solid::Dodecahedron, (20, 30, 12)),
        (Solid::Icosahedron, (12, 30, 20)),
    ];
    let mut bad = Vec::new();
    for (solid, counts) in expected {
        let p = solid.polyhedron();
        let chi_cells = p.cell_euler_characteristic();
        let chi_complex = p.complex().euler_characteristic();
        if p.cell_counts() != counts || chi_cells != 2 || chi_complex != 2 {
            bad.push(format!(
                "{} counts {:?} chi {chi_cells}/{chi_complex}",
                solid.name(),
                p.cell_counts()
            ));
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && within(elapsed, Duration::from_secs(1));
    outcome(ok, if bad.is_empty() { format!("5 solids, chi = 2, {elapsed:.2?}") } else { bad.join("; ") })
}

fn ecc_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut checks = 0;
    for seed in 0..50 {
        let d = 2 + (seed as usize % 2);
        let complex = common::random_complex(seed, d, 30);
        assert!(complex.num_simplices() <= 30);
        let w = sample_directions_uniform(1, d, seed).unwrap();
        let w = w.vector(0);
        let mut rng = Rng::new(seed, Stream::Misc);
        let values = filtration_values(&complex, w).unwrap();
        let mut thresholds: Vec<f64> = (0..100).map(|_| rng.uniform_in(-1.5, 1.5)).collect();
        // Hit the filtration values themselves so ties are exercised.
        for (i, v) in values.by_dim[0].iter().enumerate().take(10) {
            thresholds[i] = *v;
        }
        thresholds.sort_by(f64::total_cmp);
        let curve = ecc(&complex, w, &thresholds).unwrap();
        for (t, got) in thresholds.iter().zip(curve) {
            checks += 1;
            let expected = sublevel_complex(&complex, w, *t).unwrap().euler_characteristic();
            if got != expected {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, Duration::from_secs(10)),
        format!("{checks} thresholds, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn sublevel_endpoints() -> Outcome {
    let mut bad = Vec::new();
    let mut checks = 0;
    for (name, complex) in common::fixture_suite() {
        let directions = sample_directions_uniform(16, complex.d(), 3).unwrap();
        let chi = complex.euler_characteristic();
        for j in 0..directions.k() {
            let w = directions.vector(j);
            let sorted = sorted_dimension_values(&complex, w).unwrap();
            let (lo, hi) = (sorted.min().unwrap(), sorted.max().unwrap());
            let curve = ecc(&complex, w, &[lo - 0.5, lo - 1e-9, hi, hi + 1e-9, hi + 3.0]).unwrap();
            checks += 1;
            if curve[..2] != [0, 0] || curve[2..] != [chi, chi, chi] {
                bad.push(format!("{name} direction {j}: {curve:?}, chi {chi}"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("{checks} fixture directions") } else { bad.join("; ") })
}

/// Thresholds from a fixed grid at least `gap` away from every vertex height.
fn thresholds_off_values(heights: &[f64], gap: f64) -> Vec<f64> {
    linspace(-1.1, 1.1, 97)
        .into_iter()
        .filter(|t| heights.iter().all(|h| (t - h).abs() >= gap))
        .collect()
}

fn soft_to_exact() -> Outcome {
    let lambdas: Vec<f64> = (0..=14).map(|e| 2f64.powi(e)).collect();
    let mut max_err_by_lambda = vec![0.0_f64; lambdas.len()];
    let mut max_err_at_1e4 = 0.0_f64;
    for (_, complex) in common::fixture_suite() {
        let directions = sample_directions_uniform(8, complex.d(), 5).unwrap();
        for j in 0..directions.k() {
            let w = directions.vector(j);
            let heights = &filtration_values(&complex, w).unwrap().by_dim[0];
            let grid = thresholds_off_values(heights, 1e-3);
            let exact = ecc(&complex, w, &grid).unwrap();
            let err = |lambda: f64| {
                soft_ecc(&complex, w, &grid, lambda)
                    .unwrap()
                    .iter()
                    .zip(&exact)
                    .map(|(s, &e)| (s - e as f64).abs())
                    .fold(0.0, f64::max)
            };
            max_err_at_1e4 = max_err_at_1e4.max(err(1e4));
            for (slot, &lambda) in max_err_by_lambda.iter_mut().zip(&lambdas) {
                *slot = slot.max(err(lambda));
            }
        }
    }
    let monotone = max_err_by_lambda.windows(2).all(|p| p[1] <= p[0]);
    outcome(
        max_err_at_1e4 < 0.01 && monotone,
        format!(
            "max error {max_err_at_1e4:.2e} at lambda 1e4; error over lambda = 2^0..2^14 {} ({:.2e} -> {:.2e})",
            if monotone { "non-increasing" } else { "NOT monotone" },
            max_err_by_lambda[0],
            max_err_by_lambda[lambdas.len() - 1]
        ),
    )
}

fn weighted_loss(
    complex: &GeometricSimplicialComplex,
    angles: &[f64],
    grid: &ThresholdGrid,
    upstream: &Array2<f64>,
) -> f64 {
    let directions = DirectionSet::from_angles(angles).unwrap();
    let values = soft_ect(complex, &directions, grid, 4.0).unwrap().values;
    (&values * upstream).sum()
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let mut worst_abs = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    let mut failures = 0;
    let mut components = 0;
    let mut compare = |analytic: f64, numeric: f64| {
        components += 1;
        let abs = (analytic - numeric).abs();
        let rel = abs / analytic.abs().max(numeric.abs()).max(1e-300);
        worst_abs = worst_abs.max(abs);
        if analytic.abs().max(numeric.abs()) > 1e-6 {
            worst_rel = worst_rel.max(rel);
        }
        if abs >= 1e-8 && rel >= 1e-4 {
            failures += 1;
        }
    };
    for seed in 0..20 {
        let complex = common::random_complex(500 + seed, 2, 30);
        assert!(complex.n() <= 10);
        let mut rng = Rng::new(seed, Stream::Misc);
        let angles: Vec<f64> = (0..4).map(|_| rng.uniform_in(0.0, std::f64::consts::TAU)).collect();
        let grid = ThresholdGrid::unit(8).unwrap();
        let upstream = Array2::from_shape_fn((8, 4), |_| rng.normal());
        let directions = DirectionSet::from_angles(&angles).unwrap();
        let grads = soft_ect_backward(&complex, &directions, &grid, 4.0, &upstream).unwrap();

        let d_theta = grads.angles.as_ref().expect("angle directions give angle gradients");
        for j in 0..4 {
            let mut plus = angles.clone();
            let mut minus = angles.clone();
            plus[j] += h;
            minus[j] -= h;
            let numeric = (weighted_loss(&complex, &plus, &grid, &upstream)
                - weighted_loss(&complex, &minus, &grid, &upstream))
                / (2.0 * h);
            compare(d_theta[j], numeric);
        }
        let coords = complex.coordinates().to_owned();
        for v in 0..complex.n() {
            for c in 0..2 {
                let shifted = |delta: f64| {
                    let mut x = coords.clone();
                    x[[v, c]] += delta;
                    weighted_loss(&complex.with_coordinates(x).unwrap(), &angles, &grid, &upstream)
                };
                let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
                compare(grads.coordinates[[v, c]], numeric);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within(elapsed, Duration::from_secs(30)),
        format!("{components} components, {failures} over tolerance, worst absolute error {worst_abs:.2e}, worst relative error on components above 1e-6 {worst_rel:.2e}, {elapsed:.2?}"),
    )
}

fn learn_directions_run(seed: u64, steps: usize, l: usize) -> (f64, f64, Duration) {
    let config = OptimizeConfig {
        steps,
        l,
        seed,
        ..OptimizeConfig::for_directions()
    };
    let complex = GeometricSimplicialComplex::from_point_cloud(generate_double_annulus(100, seed).unwrap()).unwrap();
    let targets = sample_target_directions(config.k, 2, seed).unwrap();
    let grid = ThresholdGrid::unit(l).unwrap();
    let target = soft_ect(&complex, &targets, &grid, config.lambda).unwrap();
    let trace = learn_directions(&target, &complex, &config).unwrap();
    (trace.initial_loss, trace.final_loss, trace.elapsed)
}

fn learn_directions_replication() -> Outcome {
    let config = OptimizeConfig::for_directions();
    assert_eq!((config.k, config.l, config.steps), (32, 64, 1000));
    let start = Instant::now();
    let (initial, fin, _) = learn_directions_run(0, config.steps, config.l);
    let elapsed = start.elapsed();
    outcome(
        fin <= initial / 100.0 && within(elapsed, Duration::from_secs(60)),
        format!("initial {initial:.4}, final {fin:.6}, ratio {:.5}, {elapsed:.2?}", fin / initial),
    )
}

fn learn_coordinates_replication() -> Outcome {
    let start = Instant::now();
    let config = OptimizeConfig::for_coordinates();
    assert_eq!((config.k, config.l), (256, 256));
    let seed = config.seed;
    let target_points = generate_double_annulus(100, seed).unwrap();
    let initial = generate_noisy_circle(100, seed, DEFAULT_NOISE_SIGMA).unwrap();
    let directions = sample_directions_uniform(config.k, 2, seed).unwrap();
    let grid = ThresholdGrid::unit(config.l).unwrap();
    let target_complex = GeometricSimplicialComplex::from_point_cloud(target_points.clone()).unwrap();
    let target = soft_ect(&target_complex, &directions, &grid, config.lambda).unwrap();
    let trace = learn_coordinates(&target, initial.view(), &directions, &config).unwrap();
    let learned = trace.coordinates().unwrap();
    let chamfer = chamfer_distance(learned.view(), target_points.view());
    let diam = diameter(target_points.view());
    let elapsed = start.elapsed();
    let ok = trace.final_loss <= trace.initial_loss / 100.0
        && chamfer < 0.05 * diam
        && within(elapsed, Duration::from_secs(600));
    outcome(
        ok,
        format!(
            "initial {:.3}, final {:.2e}, chamfer {:.2}% of diameter, {elapsed:.2?}",
            trace.initial_loss,
            trace.final_loss,
            100.0 * chamfer / diam
        ),
    )
}

fn improvement_ordering() -> Outcome {
    let (_, long_fine, _) = learn_directions_run(0, 2000, 128);
    let (_, short_coarse, _) = learn_directions_run(0, 500, 32);
    outcome(
        long_fine <= short_coarse,
        format!("steps 2000 / l 128: {long_fine:.6}; steps 500 / l 32: {short_coarse:.6}"),
    )
}

fn heights_of(complex: &GeometricSimplicialComplex, directions: &DirectionSet) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..directions.k() {
        out.extend(complex.coordinates().dot(&directions.vector(j)).iter().copied());
    }
    out
}

/// Evenly spaced thresholds in [-1, 1], each pushed until it is clear of
/// every height.
fn nudged_grid(heights: &[f64]) -> Vec<f64> {
    linspace(-1.0, 1.0, 64)
        .into_iter()
        .map(|mut t| {
            while heights.iter().any(|h| (t - h).abs() < 1e-9) {
                t += 1e-7;
            }
            t
        })
        .collect()
}

fn rotation_equivariance() -> Outcome {
    let mut rng = Rng::new(9, Stream::Misc);
    let mut mismatched = Vec::new();
    let mut compared = 0;
    let suite = common::fixture_suite();
    for r in 0..10 {
        let rotations = [common::random_rotation(2, &mut rng), common::random_rotation(3, &mut rng)];
        for (name, complex) in &suite {
            let rot = &rotations[complex.d() - 2];
            let directions = sample_directions_uniform(16, complex.d(), r).unwrap();
            let rotated_dirs = directions.rotated(rot.view()).unwrap();
            let rotated = complex
                .with_coordinates(complex.coordinates().dot(&rot.t()))
                .unwrap();
            let mut heights = heights_of(complex, &directions);
            heights.extend(heights_of(&rotated, &rotated_dirs));
            let grid = ThresholdGrid::global(nudged_grid(&heights)).unwrap();
            let a = ect(complex, &directions, &grid).unwrap();
            let b = ect(&rotated, &rotated_dirs, &grid).unwrap();
            compared += 1;
            if a.values != b.values {
                mismatched.push(format!("rotation {r} on {name}"));
            }
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() { format!("{compared} rotated fixtures, integer-identical") } else { mismatched.join("; ") },
    )
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_ectkit"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let mut identical = Vec::new();
    let mut differing = Vec::new();

    run_cli(&["gen", "double-annulus", "--n", "60", "--seed", "4", "--out", &s(&p("cloud.txt"))]);
    for run in ["a", "b"] {
        run_cli(&[
            "learn-directions", "--k", "8", "--l", "16", "--steps", "60", "--seed", "4", "--out-dir", &s(&p(&format!("ld_{run}"))),
        ]);
        run_cli(&[
            "learn-coordinates", "--k", "16", "--l", "16", "--n", "30", "--steps", "40", "--seed", "4", "--out-dir",
            &s(&p(&format!("lc_{run}"))),
        ]);
        run_cli(&[
            "ect", &s(&p("cloud.txt")), "--k", "12", "--l", "20", "--lambda", "30", "--seed", "4", "--out",
            &s(&p(&format!("ect_{run}.ect"))),
        ]);
    }
    let pairs = [
        ("ld_a/learned.ect", "ld_b/learned.ect"),
        ("ld_a/target.ect", "ld_b/target.ect"),
        ("lc_a/learned.ect", "lc_b/learned.ect"),
        ("lc_a/target.ect", "lc_b/target.ect"),
        ("ect_a.ect", "ect_b.ect"),
    ];
    for (a, b) in pairs {
        if read(&p(a)) == read(&p(b)) {
            identical.push(a);
        } else {
            differing.push(a);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} archive pairs byte-identical, {} differ {differing:?}", identical.len(), differing.len()),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 10] = [
        ("platonic solids: counts and chi", platonic_table),
        ("ecc equals chi of sublevel complexes", ecc_oracle),
        ("ecc endpoints below min and above max", sublevel_endpoints),
        ("smoothed ect converges to exact ect", soft_to_exact),
        ("analytic gradients match finite differences", gradient_check),
        ("learning directions reduces loss 100x", learn_directions_replication),
        ("learning coordinates recovers the cloud", learn_coordinates_replication),
        ("longer training on finer grids does better", improvement_ordering),
        ("ect is rotation equivariant", rotation_equivariance),
        ("cli experiments are deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1?}]",
            i + 1,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
