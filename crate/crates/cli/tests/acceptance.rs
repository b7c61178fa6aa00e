//! Acceptance suite: one test per shipped claim, each printing a pass/fail
//! line (visible with `cargo test -- --nocapture`). Criteria 6–8 drive the
//! actual experiment implementations on their default frozen-seed configs.

use geojump::calculus::{
    embed_path, ito_integral_connection, ito_integral_embedding, theorem_decomposition_all,
    CoordinateField, ScalarField,
};
use geojump::geometry::EmbeddedManifold;
use geojump::linalg;
use geojump::martingales::{
    build_biased_jump_martingale, build_coupled_family, build_geodesic_jump_martingale,
    martingale_statistic, AngleLaw, DirectionBias, JumpMartingaleSpec,
};
use geojump::paths::{apply_killing, c_constant, detect_killing, CadlagPath, TimeGrid};
use geojump::seeding::derive_path_seeds;
use geojump::stats;
use geojump_cli::config::{ExperimentConfig, RawConfig};
use geojump_cli::defaults::default_config;
use geojump_cli::experiments;
use geojump_cli::report::RunWriter;
use geojump_cli::runner::{cli_run, RunArgs};
use std::sync::Arc;

fn grid(horizon: f64, steps: usize) -> Arc<TimeGrid> {
    Arc::new(TimeGrid::uniform(horizon, steps).unwrap())
}

fn sphere_spec(
    d: usize,
    lambda: f64,
    theta: f64,
    delta: f64,
    horizon: f64,
) -> JumpMartingaleSpec {
    let mut start = vec![0.0; d];
    start[0] = 1.0;
    JumpMartingaleSpec {
        manifold: EmbeddedManifold::sphere(d).unwrap(),
        start,
        jump_rate: lambda,
        angle_law: AngleLaw::Fixed(theta),
        walk_scale: delta,
        kill_rate: 0.0,
        horizon,
        jump_cap: 2.0,
        start_bound: 1.0,
    }
}

/// Run a verify experiment on its default config into a temp dir; returns
/// the check lines.
fn run_default(
    subcommand: &str,
) -> (Vec<geojump_cli::report::CheckLine>, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let text = default_config(subcommand);
    let raw = RawConfig::parse(text).unwrap();
    let config = ExperimentConfig::from_raw(&raw).unwrap();
    let mut writer = RunWriter::new(
        dir.path(),
        subcommand,
        text,
        config.base_seed,
        0,
        config.manifold.blend_radius(),
    )
    .unwrap();
    match subcommand {
        "verify-lemma31" => experiments::lemma31::run(&config, &mut writer).unwrap(),
        "verify-lemma32" => experiments::lemma32::run(&config, &mut writer).unwrap(),
        "verify-theorem1" => experiments::theorem1::run(&config, &mut writer).unwrap(),
        "verify-corollary" => experiments::corollary::run(&config, &mut writer).unwrap(),
        "localize" => experiments::localize::run(&config, &mut writer).unwrap(),
        other => panic!("unexpected subcommand {other}"),
    }
    let checks = writer.checks().to_vec();
    writer.finish().unwrap();
    (checks, dir)
}

fn assert_checks(criterion: &str, checks: &[geojump_cli::report::CheckLine]) {
    for c in checks {
        assert!(c.passed, "{criterion}: check '{}' failed: {}", c.name, c.detail);
    }
    println!("[PASS] {criterion}");
    for c in checks {
        println!("        {}: {}", c.name, c.detail);
    }
}

#[test]
fn criterion_01_connection_rule_axioms() {
    // γ(x, x) = 0 exactly; second-order tangency with log-log slope in
    // [1.8, 2.2] of the chord defect over h ∈ {1e−1..1e−4} on S¹ and S²
    // (the ċ(0)h defect is third order on spheres and stays below h²).
    for d in [2usize, 3] {
        let m = EmbeddedManifold::sphere(d).unwrap();
        let mut rng = rand::SeedableRng::seed_from_u64(41);
        let rng: &mut rand_chacha::ChaCha8Rng = &mut rng;
        for _ in 0..20 {
            let x = m.random_point(rng);
            let g = m.connection_rule(&x, &x).unwrap();
            assert!(g.iter().all(|v| *v == 0.0), "γ(x,x) must be exactly zero");
        }
        let x = m.random_point(rng);
        let v = m.random_unit_tangent(&x, rng);
        let hs = [1e-1, 1e-2, 1e-3, 1e-4];
        let mut chord_gaps = Vec::new();
        for &h in &hs {
            let y = m.geodesic_step(&x, &v, h).unwrap();
            let gamma = m.connection_rule(&x, &y).unwrap();
            chord_gaps.push(linalg::dist(&gamma, &linalg::sub(&y, &x)));
            let mut tangent_defect = gamma.clone();
            linalg::axpy(&mut tangent_defect, -h, &v);
            assert!(linalg::norm(&tangent_defect) <= h * h);
        }
        let slope = stats::loglog_slope(&hs, &chord_gaps).unwrap();
        assert!((1.8..=2.2).contains(&slope), "S^{}: slope {slope}", d - 1);
    }
    println!("[PASS] criterion 1: connection-rule axioms (exact diagonal zero, order-2 tangency)");
}

#[test]
fn criterion_02_ito_identity_routes() {
    // Relative L² gap between the connection-rule and embedding Itô
    // integrals ≤ 1e−2 for coordinate fields on S² at N = 10⁴, and the gap
    // halves (±30%) when N doubles on coupled seeds.
    let m = EmbeddedManifold::sphere(3).unwrap();
    let spec = sphere_spec(3, 4.0, 0.7, 0.5, 1.0);
    let k_paths = 160;
    let field = CoordinateField::new(m.clone(), 2).unwrap();

    let gap_at = |steps: usize| {
        let g = grid(1.0, steps);
        let mut num = 0.0;
        let mut den = 0.0;
        for seed in derive_path_seeds(202, k_paths) {
            let mart = build_geodesic_jump_martingale(&spec, &g, seed).unwrap();
            let conn = ito_integral_connection(&m, &field, &mart.path).unwrap();
            let emb = ito_integral_embedding(&m, |x| field.gradient(x), &mart.path).unwrap();
            num += (conn.last() - emb.last()).powi(2) / k_paths as f64;
            den += emb.last().powi(2) / k_paths as f64;
        }
        (num.sqrt(), (num / den.max(1e-300)).sqrt())
    };

    let (abs_n, rel_n) = gap_at(10_000);
    assert!(rel_n <= 1e-2, "relative L² route gap {rel_n} above 1e−2 at N = 10⁴");
    let (abs_2n, _) = gap_at(20_000);
    let ratio = abs_2n / abs_n;
    assert!(
        (0.35..=0.65).contains(&ratio),
        "route gap must halve when N doubles: ratio {ratio}"
    );
    println!(
        "[PASS] criterion 2: Itô identity (relative L² gap {rel_n:.2e} at N=10⁴; halving ratio {ratio:.3})"
    );
}

#[test]
fn criterion_03_discrete_ito_reconstruction() {
    // N + A + B + ῑ^i(X₀) reassembles ῑ^i(X) with max residual < 1e−8
    // over 10² paths.
    let m = EmbeddedManifold::sphere(3).unwrap();
    let spec = sphere_spec(3, 4.0, 0.8, 0.5, 2.0);
    let g = grid(2.0, 400);
    let mut worst = 0.0_f64;
    for seed in derive_path_seeds(303, 100) {
        let mart = build_geodesic_jump_martingale(&spec, &g, seed).unwrap();
        let embedded = embed_path(&m, &mart.path);
        let parts = theorem_decomposition_all(&m, &mart.path, None).unwrap();
        for (i, (n, a, b)) in parts.iter().enumerate() {
            let i0 = embedded.value(0)[i];
            for k in 0..g.len() {
                let rebuilt = i0 + n.value(k) + a.value(k) + b.value(k);
                worst = worst.max((rebuilt - embedded.value(k)[i]).abs());
            }
        }
    }
    assert!(worst < 1e-8, "reconstruction residual {worst}");
    println!("[PASS] criterion 3: discrete Itô reconstruction (max residual {worst:.2e})");
}

#[test]
fn criterion_04_martingale_property_and_power() {
    // Shipped κ = 0 spec shapes at K = 10⁴: statistic < 3; the biased
    // negative control exceeds 5.
    let shapes: Vec<(&str, JumpMartingaleSpec)> = vec![
        ("lemma31", sphere_spec(3, 2.0, 0.35, 0.05, 4.0)),
        ("corollary", sphere_spec(3, 1.5, 0.2, 0.1, 4.0)),
        ("generic", sphere_spec(3, 2.0, 0.9, 0.2, 4.0)),
    ];
    let g = grid(4.0, 800);
    let k_paths = 10_000;
    let checkpoints = [2.0, 4.0];
    let mut summary = Vec::new();
    for (name, spec) in &shapes {
        let paths: Vec<CadlagPath> = derive_path_seeds(404, k_paths)
            .into_iter()
            .map(|s| build_geodesic_jump_martingale(spec, &g, s).unwrap().path)
            .collect();
        let report = martingale_statistic(&paths, &spec.manifold, &checkpoints).unwrap();
        assert!(
            report.statistic < 3.0,
            "spec '{name}': statistic {} must stay below 3",
            report.statistic
        );
        summary.push(format!("{name} {:.2}", report.statistic));
    }

    let spec = sphere_spec(3, 2.0, 0.9, 0.2, 4.0);
    let bias = DirectionBias { ambient_direction: vec![0.0, 0.0, 1.0], strength: 0.3 };
    let paths: Vec<CadlagPath> = derive_path_seeds(405, k_paths)
        .into_iter()
        .map(|s| build_biased_jump_martingale(&spec, &g, s, &bias).unwrap().path)
        .collect();
    let report = martingale_statistic(&paths, &spec.manifold, &checkpoints).unwrap();
    assert!(report.statistic > 5.0, "biased control statistic {} must exceed 5", report.statistic);
    println!(
        "[PASS] criterion 4: martingale property (statistics: {}; biased control {:.1})",
        summary.join(", "),
        report.statistic
    );
}

#[test]
fn criterion_05_hessian_inequality_million_samples() {
    let check = experiments::hessian::verify_hessian_bound(1_000_000, 0.8, 0.35, 3, 505);
    assert!(check.samples >= 1_000_000);
    assert_eq!(check.violations, 0, "worst margin {}", check.worst_margin);
    println!(
        "[PASS] criterion 5: pair-energy Hessian inequality ({} samples, 0 violations, worst margin {:.3e})",
        check.samples, check.worst_margin
    );
}

#[test]
fn criterion_06_lemma31_boundedness() {
    let (checks, _dir) = run_default("verify-lemma31");
    assert_checks("criterion 6: stopped-QV boundedness and single-jump hand formula", &checks);
}

#[test]
fn criterion_07_theorem1_ratio_stability() {
    let (checks, _dir) = run_default("verify-theorem1");
    assert_checks(
        "criterion 7: H^p/sup-moment ratio table bounded with no blow-up as sup-distance → 0",
        &checks,
    );
}

#[test]
fn criterion_08_corollary_pipeline() {
    let (checks, _dir) = run_default("verify-corollary");
    assert_checks(
        "criterion 8: convergence pipeline (r, r̂ decrease below 0.01; limit martingale; negative control fails)",
        &checks,
    );
}

#[test]
fn criterion_09_killing_detection() {
    // Round trip detect(apply_killing(·)) exact on 10³ paths.
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 60);
    let mut rng = rand::SeedableRng::seed_from_u64(909);
    let rng: &mut rand_chacha::ChaCha8Rng = &mut rng;
    for _ in 0..1000 {
        let x = m.random_point(rng);
        let path = CadlagPath::constant(g.clone(), &x);
        let k = rand::Rng::random_range(rng, 1..g.sentinel() - 1);
        let killed = apply_killing(&path, k, m.trap());
        assert_eq!(detect_killing(&killed, &m), Some(k));
    }

    // κ > 0 coupled sequences: the detected killing index agrees across
    // the ladder on ≥ 99% of paths.
    let mut spec = sphere_spec(3, 1.5, 0.2, 0.1, 4.0);
    spec.kill_rate = 0.5;
    let g = grid(4.0, 1000);
    let scales = [1.2, 1.1, 1.05, 1.025, 1.0];
    let mut common = 0usize;
    let count = 1000;
    for seed in derive_path_seeds(910, count) {
        let family = build_coupled_family(&spec, &scales, &g, seed, None).unwrap();
        let detected: Vec<Option<usize>> =
            family.iter().map(|mm| detect_killing(&mm.path, &m)).collect();
        if detected.windows(2).all(|w| w[0] == w[1]) {
            common += 1;
        }
    }
    let fraction = common as f64 / count as f64;
    assert!(fraction >= 0.99, "common-ζ fraction {fraction}");
    println!(
        "[PASS] criterion 9: killing detection (10³ exact round trips; common-ζ fraction {fraction})"
    );
}

#[test]
fn criterion_10_constant_and_ucp_fixture() {
    let c = c_constant(1, 1.0).unwrap();
    let want = 1.0 / (2.0 * std::f64::consts::PI);
    assert!((c - want).abs() < 1e-12, "c(1,1) = {c}");

    let g = grid(3.0, 30);
    let paths = vec![CadlagPath::constant(g, &[2.0, 0.0]); 5];
    let r = geojump::metrics::ucp_metric(&paths).unwrap();
    assert_eq!(r.estimate, 0.875, "|X| ≡ 2, T = 3 fixture");
    assert_eq!(r.standard_error, 0.0);
    println!("[PASS] criterion 10: c(1,1) = 1/(2π) to 1e−12; u.c.p. fixture exactly 0.875");
}

#[test]
fn criterion_11_reproducibility_across_worker_threads() {
    // Identical config reruns produce byte-identical CSVs under 1 and 8
    // worker threads, for verify subcommands of both shapes.
    let small_corollary = "\
[martingale]
lambda = 1.5
theta = 0.2
delta = 0.1
horizon = 4.0
jump_cap = 0.5
grid_steps = 500

[run]
paths = 300
base_seed = 1111
localization_radius = 1.2
";
    let small_lemma32 = "\
[martingale]
lambda = 40.0
theta = 1.2
delta = 0.0
horizon = 4.0
jump_cap = 2.0
grid_steps = 2000

[sweep]
epsilons = 0.2,0.1

[run]
paths = 64
base_seed = 2222
hessian_samples = 20000
";
    for (sub, text) in
        [("verify-corollary", small_corollary), ("verify-lemma32", small_lemma32)]
    {
        let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
        for threads in [1usize, 8] {
            let dir = tempfile::tempdir().unwrap();
            let mut args = RunArgs::new(sub, dir.path().to_path_buf());
            args.config_text = Some(text.to_string());
            args.threads = threads;
            let code = cli_run(&args);
            assert!(code == 0 || code == 2, "{sub} must run to completion");
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap())
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| {
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            files.sort();
            assert!(!files.is_empty(), "{sub} must write CSV artifacts");
            outputs.push(files);
        }
        assert_eq!(
            outputs[0].len(),
            outputs[1].len(),
            "{sub}: same artifact set under both pools"
        );
        for (a, b) in outputs[0].iter().zip(&outputs[1]) {
            assert_eq!(a.0, b.0, "{sub}: artifact names must agree");
            assert_eq!(a.1, b.1, "{sub}: {} must be byte-identical", a.0);
        }
    }
    println!("[PASS] criterion 11: byte-identical CSVs under 1 and 8 worker threads");
}
