use super::*;
use crate::geometry::EmbeddedManifold;
use crate::linalg::SquareMatrix;
use crate::martingales::{build_geodesic_jump_martingale, AngleLaw, JumpMartingaleSpec};
use crate::paths::{sample_brownian, CadlagPath};
use std::sync::Arc;

fn grid(horizon: f64, steps: usize) -> Arc<TimeGrid> {
    Arc::new(TimeGrid::uniform(horizon, steps).unwrap())
}

fn scalar_path(g: &Arc<TimeGrid>, values: Vec<f64>, flags: Vec<bool>) -> CadlagPath {
    CadlagPath::new(g.clone(), 1, values, flags, None, vec![0.0]).unwrap()
}

fn jump_spec(
    m: EmbeddedManifold,
    start: Vec<f64>,
    lambda: f64,
    theta: f64,
    delta: f64,
    horizon: f64,
) -> JumpMartingaleSpec {
    JumpMartingaleSpec {
        manifold: m,
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

#[test]
fn stochastic_integral_telescoping_and_zero() {
    let g = grid(1.0, 32);
    let x = sample_brownian(&g, 2, 3).unwrap();
    let ones: Vec<RealPath> =
        (0..2).map(|_| RealPath::new(g.clone(), vec![1.0; 33], vec![false; 33]).unwrap()).collect();
    let zeros: Vec<RealPath> = (0..2).map(|_| RealPath::zeros(g.clone())).collect();

    let tele = stochastic_integral(&ones, &x).unwrap();
    for k in 0..x.len() {
        let want = (x.value(k)[0] - x.value(0)[0]) + (x.value(k)[1] - x.value(0)[1]);
        assert!((tele.value(k) - want).abs() < 1e-12, "H ≡ 1 telescopes to Σ(X − X₀)");
    }
    let z = stochastic_integral(&zeros, &x).unwrap();
    assert!(z.values().iter().all(|v| *v == 0.0));
}

#[test]
fn stochastic_integral_hand_path() {
    // 5-step hand path, H = sign of the previous increment.
    let g = grid(5.0, 5);
    let x = scalar_path(&g, vec![0.0, 1.0, 0.5, 0.7, 0.2, 0.4], vec![false; 6]);
    let h = RealPath::new(g.clone(), vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0], vec![false; 6])
        .unwrap();
    let got = stochastic_integral(std::slice::from_ref(&h), &x).unwrap();
    let want = [0.0, 1.0, 0.5, 0.3, -0.2, -0.4];
    for k in 0..6 {
        assert!((got.value(k) - want[k]).abs() < 1e-14, "index {k}");
    }
}

#[test]
fn stochastic_integral_grid_mismatch() {
    let g1 = grid(1.0, 8);
    let g2 = grid(1.0, 9);
    let x = sample_brownian(&g1, 1, 1).unwrap();
    let h = vec![RealPath::zeros(g2)];
    assert!(matches!(stochastic_integral(&h, &x), Err(Error::GridMismatch)));
}

#[test]
fn quadratic_variation_smooth_path_vanishes_with_refinement() {
    // C¹ deterministic path sampled with no flags: jump part identically 0
    // and total QV → 0 as Δt → 0.
    let qv_of = |steps: usize| {
        let g = grid(1.0, steps);
        let values: Vec<f64> = g.times().iter().map(|t| (2.0 * t).sin()).collect();
        let n = values.len();
        let x = scalar_path(&g, values, vec![false; n]);
        let qv = quadratic_variation(&x, &x).unwrap();
        assert!(qv.jump.values().iter().all(|v| *v == 0.0));
        qv.total.last()
    };
    let coarse = qv_of(100);
    let fine = qv_of(1000);
    assert!(fine < coarse / 5.0, "QV of a C¹ path must vanish: {coarse} → {fine}");
}

#[test]
fn quadratic_variation_single_jump_and_geodesic_chord() {
    let g = grid(1.0, 4);
    let mut values = vec![0.0; 5 * 2];
    // Jump of v = (0.3, −0.4) at k = 2.
    for k in 2..5 {
        values[2 * k] = 0.3;
        values[2 * k + 1] = -0.4;
    }
    let flags = vec![false, false, true, false, false];
    let x = CadlagPath::new(g.clone(), 2, values, flags, None, vec![0.0; 2]).unwrap();
    let qv = quadratic_variation(&x, &x).unwrap();
    assert!((qv.jump.last() - 0.25).abs() < 1e-15, "|v|² = 0.09 + 0.16");
    assert!((qv.continuous.last()).abs() < 1e-15);

    // A geodesic jump of angle θ on the sphere adds the squared chord
    // 4 sin²(θ/2).
    let m = EmbeddedManifold::sphere(3).unwrap();
    let theta = 0.8;
    let x0 = vec![0.0, 0.0, 1.0];
    let y = m.geodesic_step(&x0, &[1.0, 0.0, 0.0], theta).unwrap();
    let mut values = Vec::new();
    values.extend_from_slice(&x0);
    values.extend_from_slice(&y);
    values.extend_from_slice(&y);
    let x = CadlagPath::new(
        grid(1.0, 2),
        3,
        values,
        vec![false, true, false],
        None,
        vec![0.0; 3],
    )
    .unwrap();
    let qv = quadratic_variation(&x, &x).unwrap();
    let want = 4.0 * (theta / 2.0_f64).sin().powi(2);
    assert!((qv.total.last() - want).abs() < 1e-12);
}

#[test]
fn quadratic_variation_polarization_is_exact() {
    let g = grid(1.0, 64);
    let x = sample_brownian(&g, 2, 11).unwrap();
    let y = sample_brownian(&g, 2, 12).unwrap();
    let mut sum_values = Vec::with_capacity(g.len() * 2);
    for k in 0..g.len() {
        for i in 0..2 {
            sum_values.push(x.value(k)[i] + y.value(k)[i]);
        }
    }
    let sum =
        CadlagPath::new(g.clone(), 2, sum_values, vec![false; g.len()], None, vec![0.0; 2])
            .unwrap();
    let qxx = quadratic_variation(&x, &x).unwrap().total;
    let qyy = quadratic_variation(&y, &y).unwrap().total;
    let qxy = quadratic_variation(&x, &y).unwrap().total;
    let qss = quadratic_variation(&sum, &sum).unwrap().total;
    for k in 0..g.len() {
        let want = qxx.value(k) + 2.0 * qxy.value(k) + qyy.value(k);
        assert!(
            (qss.value(k) - want).abs() < 1e-12 * (1.0 + want.abs()),
            "[X+Y] = [X] + 2[X,Y] + [Y] at {k}"
        );
    }
}

#[test]
fn embedding_integral_constant_and_linear() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 16);
    let constant = CadlagPath::constant(g.clone(), &[1.0, 0.0, 0.0]);
    let coord = CoordinateField::new(m.clone(), 2).unwrap();
    let z = ito_integral_embedding(&m, |x| coord.gradient(x), &constant).unwrap();
    assert!(z.values().iter().all(|v| *v == 0.0));

    // Linear field: ∫⟨c, dX⟩ = ⟨c, X − X₀⟩ by telescoping.
    let spec = jump_spec(m.clone(), vec![1.0, 0.0, 0.0], 6.0, 0.5, 0.4, 1.0);
    let g = grid(1.0, 200);
    let mart = build_geodesic_jump_martingale(&spec, &g, 5).unwrap();
    let c = [0.3, -1.2, 0.7];
    let lin = ito_integral_embedding(&m, |_| c.to_vec(), &mart.path).unwrap();
    for k in 0..g.len() {
        let want: f64 = (0..3)
            .map(|i| c[i] * (mart.path.value(k)[i] - mart.path.value(0)[i]))
            .sum();
        assert!((lin.value(k) - want).abs() < 1e-12);
    }
}

#[test]
fn embedding_integral_rejects_off_manifold_paths() {
    let m = EmbeddedManifold::sphere(2).unwrap();
    let g = grid(1.0, 4);
    let bad = CadlagPath::constant(g, &[1.3, 0.0]);
    let res = ito_integral_embedding(&m, |x| x.to_vec(), &bad);
    assert!(matches!(res, Err(Error::OffManifold { .. })));
}

/// Angle patch on S¹ (valid away from the cut at ±π): value, ambient
/// gradient and Hessian of atan2.
struct AnglePatch;

impl ScalarField for AnglePatch {
    fn value(&self, x: &[f64]) -> f64 {
        x[1].atan2(x[0])
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        vec![-x[1] / r2, x[0] / r2]
    }

    fn hessian(&self, x: &[f64]) -> SquareMatrix {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r4 = r2 * r2;
        let mut h = SquareMatrix::zeros(2);
        h.set(0, 0, 2.0 * x[0] * x[1] / r4);
        h.set(0, 1, (x[1] * x[1] - x[0] * x[0]) / r4);
        h.set(1, 0, (x[1] * x[1] - x[0] * x[0]) / r4);
        h.set(1, 1, -2.0 * x[0] * x[1] / r4);
        h
    }

    fn name(&self) -> String {
        "angle".into()
    }
}

#[test]
fn connection_integral_constant_cases() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 8);
    let constant = CadlagPath::constant(g.clone(), &[0.0, 1.0, 0.0]);
    let coord = CoordinateField::new(m.clone(), 0).unwrap();
    let z = ito_integral_connection(&m, &coord, &constant).unwrap();
    assert!(z.values().iter().all(|v| *v == 0.0), "constant path integrates to zero");

    // Constant field: every term vanishes or cancels.
    let spec = jump_spec(m.clone(), vec![1.0, 0.0, 0.0], 5.0, 0.6, 0.3, 1.0);
    let g = grid(1.0, 200);
    let mart = build_geodesic_jump_martingale(&spec, &g, 9).unwrap();
    let f = LinearField::new(vec![0.0, 0.0, 0.0]);
    let z = ito_integral_connection(&m, &f, &mart.path).unwrap();
    assert!(z.values().iter().all(|v| v.abs() < 1e-14));
}

/// Route-identity tolerance: C · (Δt + max|ΔX|³ · jumps / N), with C
/// calibrated once on the sphere and frozen here.
fn identity_tolerance(path: &CadlagPath) -> f64 {
    const C_CAL: f64 = 10.0;
    let n = path.grid().steps() as f64;
    let dt = path.grid().horizon() / n;
    let mut buf = vec![0.0; path.dim()];
    let mut max_jump = 0.0_f64;
    let mut jumps = 0.0;
    for k in 1..path.len() {
        if path.jump_flag(k) {
            path.increment_into(k, &mut buf);
            max_jump = max_jump.max(crate::linalg::norm(&buf));
            jumps += 1.0;
        }
    }
    C_CAL * (dt + max_jump.powi(3) * jumps / n)
}

#[test]
fn connection_and_embedding_routes_agree_on_s1_angle_patch() {
    let m = EmbeddedManifold::sphere(2).unwrap();
    let g = grid(1.0, 2000);
    // Small moves keep the path away from the branch cut at angle ±π.
    let spec = jump_spec(m.clone(), vec![1.0, 0.0], 3.0, 0.2, 0.3, 1.0);
    let mart = build_geodesic_jump_martingale(&spec, &g, 77).unwrap();
    for k in 0..g.len() {
        let v = mart.path.value(k);
        assert!(v[1].atan2(v[0]).abs() < 2.5, "path strayed near the cut");
    }
    let patch = AnglePatch;
    let conn = ito_integral_connection(&m, &patch, &mart.path).unwrap();
    let emb = ito_integral_embedding(&m, |x| patch.gradient(x), &mart.path).unwrap();
    let tol = identity_tolerance(&mart.path);
    let sup_gap = (0..g.len())
        .map(|k| (conn.value(k) - emb.value(k)).abs())
        .fold(0.0_f64, f64::max);
    assert!(sup_gap <= tol, "angle-patch identity gap {sup_gap} above tolerance {tol}");
}

fn relative_l2_gap(a: &RealPath, b: &RealPath) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..a.len() {
        num += (a.value(k) - b.value(k)).powi(2);
        den += b.value(k).powi(2);
    }
    (num / den.max(1e-300)).sqrt()
}

#[test]
fn connection_and_embedding_routes_agree_on_s2_coordinates() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 10_000);
    let spec = jump_spec(m.clone(), vec![0.0, 0.0, 1.0], 4.0, 0.7, 0.5, 1.0);
    let mart = build_geodesic_jump_martingale(&spec, &g, 123).unwrap();
    // f(x) = x₃ through both routes.
    let coord = CoordinateField::new(m.clone(), 2).unwrap();
    let conn = ito_integral_connection(&m, &coord, &mart.path).unwrap();
    let emb = ito_integral_embedding(&m, |x| coord.gradient(x), &mart.path).unwrap();
    let gap = relative_l2_gap(&conn, &emb);
    assert!(gap <= 1e-2, "relative L² route gap {gap} above 1e−2 at N = 10⁴");
}

#[test]
fn identity_gap_decays_at_first_order_in_dt() {
    // Diffusion-only paths: the only residual between the two routes is the
    // third-order Taylor term of the walk steps, so the ensemble L² gap
    // scales like Δt.
    let m = EmbeddedManifold::sphere(3).unwrap();
    let levels = [250usize, 500, 1000, 2000];
    let mut gaps = Vec::new();
    for &steps in &levels {
        let g = grid(1.0, steps);
        let spec = jump_spec(m.clone(), vec![0.0, 0.0, 1.0], 0.0, 0.0, 0.8, 1.0);
        let coord = CoordinateField::new(m.clone(), 0).unwrap();
        let mut acc = 0.0;
        let k_paths = 48;
        for seed in crate::seeding::derive_path_seeds(1213, k_paths) {
            let mart = build_geodesic_jump_martingale(&spec, &g, seed).unwrap();
            let conn = ito_integral_connection(&m, &coord, &mart.path).unwrap();
            let emb =
                ito_integral_embedding(&m, |x| coord.gradient(x), &mart.path).unwrap();
            acc += (conn.last() - emb.last()).powi(2) / k_paths as f64;
        }
        gaps.push(acc.sqrt());
    }
    let dts: Vec<f64> = levels.iter().map(|s| 1.0 / *s as f64).collect();
    let slope = crate::stats::loglog_slope(&dts, &gaps).unwrap();
    assert!(slope >= 0.9, "route-identity convergence order {slope} below 0.9");
    assert!(slope <= 1.6, "route-identity convergence order {slope} implausibly high");
}

#[test]
fn theorem_decomposition_constant_and_pure_jump() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 16);
    let constant = CadlagPath::constant(g.clone(), &[1.0, 0.0, 0.0]);
    for i in 0..3 {
        let (n, a, b) = theorem_decomposition(&m, &constant, i).unwrap();
        assert!(n.values().iter().all(|v| *v == 0.0));
        assert!(a.values().iter().all(|v| *v == 0.0));
        assert!(b.values().iter().all(|v| *v == 0.0));
    }

    // Pure-jump path (no unflagged moves): the continuous second-order part
    // is identically zero.
    let g = grid(1.0, 100);
    let spec = jump_spec(m.clone(), vec![1.0, 0.0, 0.0], 8.0, 0.9, 0.0, 1.0);
    let mart = build_geodesic_jump_martingale(&spec, &g, 31).unwrap();
    assert!(mart.path.jump_flags().iter().any(|f| *f), "fixture needs at least one jump");
    let (_, a, _) = theorem_decomposition(&m, &mart.path, 1).unwrap();
    assert!(a.values().iter().all(|v| *v == 0.0), "A ≡ 0 for pure-jump paths");
}

#[test]
fn theorem_decomposition_reconstructs_exactly() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(2.0, 400);
    let spec = jump_spec(m.clone(), vec![0.0, 1.0, 0.0], 4.0, 0.8, 0.5, 2.0);
    let mut worst = 0.0_f64;
    for seed in crate::seeding::derive_path_seeds(57, 100) {
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
    assert!(worst < 1e-8, "reconstruction residual {worst} above 1e−8");
}

#[test]
fn theorem_decomposition_n_equals_embedding_integral() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let g = grid(1.0, 200);
    let spec = jump_spec(m.clone(), vec![1.0, 0.0, 0.0], 5.0, 0.7, 0.4, 1.0);
    let mart = build_geodesic_jump_martingale(&spec, &g, 91).unwrap();
    for i in 0..3 {
        let (n, _, _) = theorem_decomposition(&m, &mart.path, i).unwrap();
        let coord = CoordinateField::new(m.clone(), i).unwrap();
        let emb = ito_integral_embedding(&m, |x| coord.gradient(x), &mart.path).unwrap();
        for k in 0..g.len() {
            assert!((n.value(k) - emb.value(k)).abs() < 1e-12);
        }
    }
}

#[test]
fn stopping_consistency_of_integrals() {
    // ∫ H dX^τ = (∫ H dX)^τ, the gluing manipulation behind localization.
    let g = grid(1.0, 64);
    let x = sample_brownian(&g, 2, 5).unwrap();
    let h: Vec<RealPath> = (0..2)
        .map(|i| {
            let vals: Vec<f64> =
                (0..g.len()).map(|k| ((k + i) as f64 * 0.3).sin()).collect();
            RealPath::new(g.clone(), vals, vec![false; g.len()]).unwrap()
        })
        .collect();
    for tau in [0usize, 10, 40, 63, 64, 65] {
        let stopped_first = stochastic_integral(&h, &x.stopped(tau)).unwrap();
        let stopped_after = stochastic_integral(&h, &x).unwrap().stopped(tau);
        for k in 0..g.len() {
            assert!(
                (stopped_first.value(k) - stopped_after.value(k)).abs() < 1e-14,
                "τ = {tau}, k = {k}"
            );
        }
    }
}

#[test]
fn decomposition_validation_catches_broken_parts() {
    let g = grid(1.0, 8);
    let source = RealPath::new(g.clone(), (0..9).map(|k| k as f64).collect(), vec![false; 9])
        .unwrap();
    // M doubles the increments: X₀ + M + A ≠ X.
    let m = RealPath::new(g.clone(), (0..9).map(|k| 2.0 * k as f64).collect(), vec![false; 9])
        .unwrap();
    let a = RealPath::zeros(g.clone());
    assert!(SemimartingaleDecomposition::new(&source, m, a).is_err());
    // Parts that start away from zero are rejected outright.
    let bad_start =
        RealPath::new(g.clone(), vec![1.0; 9], vec![false; 9]).unwrap();
    assert!(SemimartingaleDecomposition::new(&source, bad_start, RealPath::zeros(g)).is_err());
}

#[test]
fn field_registry_resolves_and_rejects() {
    let m = EmbeddedManifold::sphere(3).unwrap();
    let f = resolve_field("coord:1", &m).unwrap();
    assert_eq!(f.name(), "coord:1");
    let x = [0.0, 1.0, 0.0];
    assert!((f.value(&x) - 1.0).abs() < 1e-15);
    let f = resolve_field("linear:1,0,-2", &m).unwrap();
    assert!((f.value(&[0.5, 3.0, 1.0]) + 1.5).abs() < 1e-15);
    assert!(resolve_field("coord:7", &m).is_err());
    assert!(resolve_field("linear:1,2", &m).is_err());
    assert!(resolve_field("spline:3", &m).is_err());
    assert_eq!(field_dictionary(&m).len(), 3);
}
