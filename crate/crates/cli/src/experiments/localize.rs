//! Localization stopping-time chains from geodesic-ball covers.
//!
//! On each limit path: `τ₀ = 0`, `τ_{i+1}` = first exit from the inner ball
//! `U_{j(i)}` after `τ_i`, with the ball index `j(i)` cycling round-robin
//! so every ball recurs. For each sequence member `Xᵐ`:
//! `σ̃ₘ^{(i)}` = first exit of `Xᵐ` from the outer ball `V_{j(i)}` after
//! `τ_i`, and `σₘ^{(i)} = (inf_{n≥m} σ̃ₙ^{(i)}) ∧ τ_{i+1}`.
//!
//! Verified pathwise from the data: property (iv) — members with `n ≥ m`
//! stay inside `V_{j(i)}` on `[τ_i, σₘ^{(i)})` — and the convergence
//! surrogate of property (ii): `σₘ^{(i)} = τ_{i+1}` from some finite m₀ on.

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiments::par_paths;
use crate::report::{fcol, RunWriter};
use geojump::geometry::{ball_cover, BallCover};
use geojump::linalg;
use geojump::martingales::build_coupled_family;
use geojump::paths::{CadlagPath, TimeGrid};
use std::sync::Arc;

pub struct ChainRow {
    pub i: usize,
    pub ball: usize,
    pub tau: usize,
    pub tau_next: usize,
    pub sigmas: Vec<usize>,
}

/// First index ≥ start at which the path leaves the ball of the given
/// radius around the center.
fn first_exit_ball_after(
    path: &CadlagPath,
    start: usize,
    center: &[f64],
    radius: f64,
) -> usize {
    for k in start..path.len() {
        if linalg::dist(path.value(k), center) > radius {
            return k;
        }
    }
    path.grid().sentinel()
}

/// Build the chain on the limit path and the per-member exit times.
pub fn localization_chain(
    limit: &CadlagPath,
    members: &[&CadlagPath],
    cover: &BallCover,
) -> Vec<ChainRow> {
    let sentinel = limit.grid().sentinel();
    let max_rows = 200 * cover.len();
    let mut rows = Vec::new();
    let mut tau = 0usize;
    for i in 0..max_rows {
        if tau >= sentinel - 1 {
            break;
        }
        let ball = i % cover.len();
        let center = &cover.centers()[ball];
        let tau_next = first_exit_ball_after(limit, tau, center, cover.inner_radius());
        let sigma_tilde: Vec<usize> = members
            .iter()
            .map(|m| first_exit_ball_after(m, tau, center, cover.outer_radius()))
            .collect();
        let sigmas: Vec<usize> = (0..members.len())
            .map(|m| {
                let inf_tail = sigma_tilde[m..].iter().copied().min().unwrap_or(sentinel);
                inf_tail.min(tau_next)
            })
            .collect();
        rows.push(ChainRow { i, ball, tau, tau_next, sigmas });
        if tau_next >= sentinel {
            break;
        }
        tau = tau_next;
    }
    rows
}

/// Pathwise verification of property (iv) by scanning the data.
pub fn property_iv_holds(rows: &[ChainRow], members: &[&CadlagPath], cover: &BallCover) -> bool {
    for row in rows {
        if row.tau >= row.tau_next {
            continue;
        }
        for m in 0..members.len() {
            let sigma = row.sigmas[m];
            if row.tau >= sigma {
                continue;
            }
            for member in &members[m..] {
                let hi = sigma.min(member.len());
                for k in row.tau..hi {
                    if !cover.in_outer(row.ball, member.value(k)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Property (ii) surrogate: on dwell rows (τ_i < τ_{i+1}) some finite m₀
/// has σₘ = τ_{i+1} for every m ≥ m₀.
pub fn property_ii_surrogate(rows: &[ChainRow]) -> (usize, usize) {
    let mut dwell = 0;
    let mut ok = 0;
    for row in rows {
        if row.tau >= row.tau_next {
            continue;
        }
        dwell += 1;
        let m0 = row.sigmas.iter().position(|s| *s == row.tau_next);
        if let Some(m0) = m0 {
            if row.sigmas[m0..].iter().all(|s| *s == row.tau_next) {
                ok += 1;
            }
        }
    }
    (ok, dwell)
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<(), ConfigError> {
    let (bounds, threshold) = crate::experiments::lemma31::small_range_threshold(config)?;
    writer.set_threshold(bounds, threshold);

    let inner = config.localization_radius / 4.0;
    let outer = config.localization_radius / 2.0;
    let cover = ball_cover(&config.manifold, inner, outer)?;

    let cover_rows: Vec<Vec<String>> = cover
        .centers()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut row = vec![j.to_string()];
            row.extend(c.iter().map(|x| fcol(*x)));
            row.push(fcol(cover.inner_radius()));
            row.push(fcol(cover.outer_radius()));
            row
        })
        .collect();
    let coord_header: Vec<String> =
        (1..=config.manifold.ambient_dim()).map(|i| format!("c{i}")).collect();
    writer
        .write_csv(
            "cover.csv",
            &format!("ball,{},inner_radius,outer_radius", coord_header.join(",")),
            &cover_rows,
        )
        .ok();

    let mut scales: Vec<f64> = config.epsilons.iter().map(|e| 1.0 + e).collect();
    scales.push(1.0);
    let spec = &config.martingale;
    let grid = Arc::new(TimeGrid::uniform(spec.horizon, config.grid_steps)?);
    let count = config.paths.min(1000);

    type PathOutcome = (bool, usize, usize, Vec<ChainRow>);
    let outcomes: Vec<Result<PathOutcome, geojump::Error>> =
        par_paths(config.base_seed, count, |s, _| {
            let family = build_coupled_family(spec, &scales, &grid, s, None)?;
            let limit = &family.last().unwrap().path;
            let members: Vec<&CadlagPath> =
                family[..family.len() - 1].iter().map(|m| &m.path).collect();
            let rows = localization_chain(limit, &members, &cover);
            let iv = property_iv_holds(&rows, &members, &cover);
            let (ok, dwell) = property_ii_surrogate(&rows);
            Ok((iv, ok, dwell, rows))
        });
    let outcomes: Vec<PathOutcome> =
        outcomes.into_iter().collect::<Result<_, geojump::Error>>()?;

    let iv_fraction =
        outcomes.iter().filter(|o| o.0).count() as f64 / outcomes.len() as f64;
    let (ii_ok, ii_dwell) = outcomes
        .iter()
        .fold((0usize, 0usize), |acc, o| (acc.0 + o.1, acc.1 + o.2));
    let ii_fraction = if ii_dwell == 0 { 1.0 } else { ii_ok as f64 / ii_dwell as f64 };

    writer.check(
        "localize_property_iv",
        iv_fraction >= 0.99,
        format!("members stay in V_j(i) on [tau_i, sigma_m): fraction {}", fcol(iv_fraction)),
    );
    writer.check(
        "localize_property_ii_surrogate",
        ii_fraction >= 0.99,
        format!(
            "sigma_m = tau_(i+1) from a finite m0 on: {} of {} dwell rows",
            ii_ok, ii_dwell
        ),
    );

    // Stopping-time tables for the first few paths.
    let mut table = Vec::new();
    for (pi, (_, _, _, rows)) in outcomes.iter().take(3).enumerate() {
        for row in rows {
            let mut cells = vec![
                pi.to_string(),
                row.i.to_string(),
                row.ball.to_string(),
                row.tau.to_string(),
                row.tau_next.to_string(),
            ];
            cells.extend(row.sigmas.iter().map(|s| s.to_string()));
            table.push(cells);
        }
    }
    let sigma_header: Vec<String> = (0..scales.len() - 1).map(|m| format!("sigma_m{m}")).collect();
    writer
        .write_csv(
            "localization_times.csv",
            &format!("path,i,ball,tau_i,tau_next,{}", sigma_header.join(",")),
            &table,
        )
        .ok();
    Ok(())
}
