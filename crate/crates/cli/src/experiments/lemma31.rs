//! Boundedness of stopped quadratic variations: estimates
//! `E[[ῑ(X), ῑ(X)]^p_τ]` with `τ` the first exit of the embedded path from
//! the R-ball around its start, across a (λ, grid) family, and checks the
//! single-jump hand formula `E[[X,X]_τ] ≈ λT · 4 sin²(θ/2)`.

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiments::par_paths;
use crate::report::{fcol, RunWriter};
use geojump::calculus::{embed_path, quadratic_variation};
use geojump::geometry::derivative_bounds;
use geojump::martingales::{build_geodesic_jump_martingale, AngleLaw, JumpMartingaleSpec};
use geojump::paths::{first_exit_time, TimeGrid};
use geojump::stats;
use std::sync::Arc;

/// Small-range threshold `R < 1/(2 d e² a₂)` with `a₂` sampled over the
/// ball of radius `R₀ + α + β`; radii below it make the stopped-QV bound
/// provably uniform over the martingale class.
pub fn small_range_threshold(
    config: &ExperimentConfig,
) -> Result<(geojump::geometry::DerivativeBounds, f64), ConfigError> {
    let reach = config.radius + config.martingale.jump_cap + config.martingale.start_bound;
    let bounds = derivative_bounds(&config.manifold, reach)?;
    let d = config.manifold.ambient_dim() as f64;
    let threshold = 1.0 / (2.0 * d * std::f64::consts::E.powi(2) * bounds.a2);
    Ok((bounds, threshold))
}

fn stopped_qv_moment(
    config: &ExperimentConfig,
    spec: &JumpMartingaleSpec,
    steps: usize,
    p: f64,
    count: usize,
    seed: u64,
) -> Result<(f64, f64), ConfigError> {
    let grid = Arc::new(TimeGrid::uniform(spec.horizon, steps)?);
    let vals: Vec<Result<f64, geojump::Error>> = par_paths(seed, count, |s, _| {
        let mart = build_geodesic_jump_martingale(spec, &grid, s)?;
        let embedded = embed_path(&config.manifold, &mart.path);
        let start = embedded.value(0).to_vec();
        let tau = first_exit_time(&embedded, &start, config.radius);
        let qv = quadratic_variation(&embedded, &embedded)?;
        let kend = tau.min(grid.len() - 1);
        Ok(qv.total.value(kend).powf(p))
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_, _>>()?;
    Ok(stats::mean_and_se(&vals))
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<(), ConfigError> {
    let (bounds, threshold) = small_range_threshold(config)?;
    writer.set_threshold(bounds, threshold);
    if config.strict_threshold && config.radius >= threshold {
        return Err(ConfigError(format!(
            "strict threshold violated: R = {} must be below 1/(2 d e² a₂) = {}",
            config.radius, threshold
        )));
    }

    // (λ, grid) sweep at the configured p.
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    let mut ses = Vec::new();
    for &lambda in &config.lambdas {
        for &steps in &config.grids {
            let spec = config.martingale_with(lambda, config.martingale.horizon);
            let (est, se) =
                stopped_qv_moment(config, &spec, steps, config.p, config.paths, config.base_seed)?;
            rows.push(vec![
                fcol(lambda),
                steps.to_string(),
                fcol(config.p),
                fcol(est),
                fcol(se),
            ]);
            estimates.push(est);
            ses.push(se);
        }
    }
    writer.write_csv("lemma31_sweep.csv", "lambda,grid_steps,p,estimate,se", &rows).ok();

    let max_idx = estimates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let med = stats::median(&estimates);
    let med_se = stats::median(&ses);
    let drift = estimates[max_idx] - med;
    let band = 3.0 * (ses[max_idx] * ses[max_idx] + med_se * med_se).sqrt();
    writer.check(
        "lemma31_sweep_no_upward_drift",
        drift <= band,
        format!(
            "max {} vs median {} over the 8x (lambda, grid) family; drift {} within 3 SE band {}",
            fcol(estimates[max_idx]),
            fcol(med),
            fcol(drift),
            fcol(band)
        ),
    );

    // Single-jump family: λT ≪ 1, δ = 0, p = 1; large R so stopping never
    // censors the count and E[#jumps] = λT exactly.
    let theta = config.martingale.angle_law.max_angle();
    let single = JumpMartingaleSpec {
        jump_rate: 0.02,
        walk_scale: 0.0,
        angle_law: AngleLaw::Fixed(theta),
        horizon: 1.0,
        ..config.martingale.clone()
    };
    let single_paths = config.paths.max(10_000);
    let (est, se) = {
        let mut cfg = config.clone();
        cfg.radius = 1e6;
        stopped_qv_moment(&cfg, &single, 200, 1.0, single_paths, config.base_seed ^ 0x51)?
    };
    let hand = single.jump_rate * single.horizon * 4.0 * (theta / 2.0).sin().powi(2);
    writer.check(
        "lemma31_single_jump_hand_formula",
        (est - hand).abs() <= 3.0 * se,
        format!("estimate {} vs lambda*T*4sin^2(theta/2) = {} (3 SE = {})", fcol(est), fcol(hand), fcol(3.0 * se)),
    );
    writer
        .write_csv(
            "lemma31_single_jump.csv",
            "lambda,horizon,theta,estimate,se,hand_value",
            &[vec![
                fcol(single.jump_rate),
                fcol(single.horizon),
                fcol(theta),
                fcol(est),
                fcol(se),
                fcol(hand),
            ]],
        )
        .ok();
    Ok(())
}
