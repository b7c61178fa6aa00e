//! The data-facing subcommands: `simulate`, `integrate` and `metrics`.

use crate::config::{ConfigError, ExperimentConfig, RawConfig};
use crate::experiments::par_paths;
use crate::report::{fcol, RunWriter};
use geojump::calculus::{ito_integral_connection, ito_integral_embedding, resolve_field};
use geojump::martingales::{build_coupled_pair, build_geodesic_jump_martingale};
use geojump::metrics::{default_dictionary, hp_norm_upper, rhat_lower, ucp_metric, HpSample};
use geojump::paths::{
    sample_alpha_stable, sample_brownian, sample_compound_poisson, CadlagPath, TimeGrid,
};
use serde::Serialize;
use std::sync::Arc;

fn path_rows(path: &CadlagPath) -> Vec<Vec<String>> {
    let grid = path.grid();
    (0..path.len())
        .map(|k| {
            let mut row = vec![fcol(grid.times()[k])];
            row.extend(path.value(k).iter().map(|x| fcol(*x)));
            row.push(if path.jump_flag(k) { "1".into() } else { "0".into() });
            let killed = path.kill_index().is_some_and(|ki| k >= ki);
            row.push(if killed { "1".into() } else { "0".into() });
            row
        })
        .collect()
}

fn path_header(dim: usize) -> String {
    let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    format!("time,{},jump_flag,killed", coords.join(","))
}

#[derive(Serialize)]
struct EnsembleManifest {
    driver: String,
    horizon: f64,
    grid_steps: usize,
    dim: usize,
    count: usize,
    base_seed: u64,
    manifold: Option<String>,
    alpha: Option<f64>,
}

pub fn simulate(
    raw: &RawConfig,
    config: &ExperimentConfig,
    alpha_override: Option<f64>,
    writer: &mut RunWriter,
) -> Result<(), ConfigError> {
    let kind = raw.str_or("driver", "kind", "geodesic_jump").to_string();
    let dim = raw.usize_or("driver", "dim", config.manifold.ambient_dim())?;
    let alpha = match alpha_override {
        Some(a) => a,
        None => raw.f64_or("driver", "alpha", 1.0)?,
    };
    let rate = raw.f64_or("driver", "rate", 2.0)?;
    let jump_std = raw.f64_or("driver", "jump_std", 1.0)?;
    let dump = raw.usize_or("driver", "dump_paths", 8)?;
    let grid = Arc::new(TimeGrid::uniform(config.martingale.horizon, config.grid_steps)?);

    type Built = (CadlagPath, Option<Vec<geojump::martingales::StepKind>>);
    let build = |seed: u64| -> Result<Built, geojump::Error> {
        match kind.as_str() {
            "brownian" => Ok((sample_brownian(&grid, dim, seed)?, None)),
            "alpha_stable" => Ok((sample_alpha_stable(&grid, dim, alpha, seed)?, None)),
            "compound_poisson" => {
                Ok((sample_compound_poisson(&grid, dim, rate, jump_std, seed)?, None))
            }
            "geodesic_jump" => {
                let mart = build_geodesic_jump_martingale(&config.martingale, &grid, seed)?;
                Ok((mart.path, Some(mart.log)))
            }
            other => Err(geojump::Error::InvalidParam(format!("unknown driver '{other}'"))),
        }
    };

    let paths: Vec<Result<Built, geojump::Error>> =
        par_paths(config.base_seed, config.paths, |s, _| build(s));
    let built: Vec<Built> = paths.into_iter().collect::<Result<_, geojump::Error>>()?;
    let paths: Vec<CadlagPath> = built.iter().map(|b| b.0.clone()).collect();

    for (i, (p, log)) in built.iter().take(dump).enumerate() {
        writer.write_csv(&format!("path_{i:04}.csv"), &path_header(p.dim()), &path_rows(p)).ok();
        // Event log sidecar: replays the canonical decomposition.
        if let Some(log) = log {
            let rows: Vec<Vec<String>> = log
                .iter()
                .enumerate()
                .map(|(k, kind)| vec![k.to_string(), format!("{kind:?}").to_lowercase()])
                .collect();
            writer.write_csv(&format!("events_{i:04}.csv"), "index,kind", &rows).ok();
        }
    }
    writer
        .write_json(
            "ensemble_manifest.json",
            &EnsembleManifest {
                driver: kind.clone(),
                horizon: grid.horizon(),
                grid_steps: grid.steps(),
                dim: paths[0].dim(),
                count: paths.len(),
                base_seed: config.base_seed,
                manifold: (kind == "geodesic_jump")
                    .then(|| format!("{:?}", config.manifold.catalog()).to_lowercase()),
                alpha: (kind == "alpha_stable").then_some(alpha),
            },
        )
        .ok();
    writer.check(
        "simulate_ensemble_built",
        true,
        format!("{} {} paths on a {}-step grid", paths.len(), kind, grid.steps()),
    );
    Ok(())
}

pub fn integrate(
    raw: &RawConfig,
    config: &ExperimentConfig,
    writer: &mut RunWriter,
) -> Result<(), ConfigError> {
    let field_name = raw.str_or("fields", "integrand", "coord:0").to_string();
    let field = resolve_field(&field_name, &config.manifold)?;
    let grid = Arc::new(TimeGrid::uniform(config.martingale.horizon, config.grid_steps)?);
    let mart = build_geodesic_jump_martingale(&config.martingale, &grid, config.base_seed)?;
    let conn = ito_integral_connection(&config.manifold, field.as_ref(), &mart.path)?;
    let emb = ito_integral_embedding(&config.manifold, |x| field.gradient(x), &mart.path)?;

    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|k| {
            vec![
                fcol(grid.times()[k]),
                fcol(conn.value(k)),
                fcol(emb.value(k)),
                fcol(conn.value(k) - emb.value(k)),
            ]
        })
        .collect();
    writer
        .write_csv(
            "integral.csv",
            "time,connection_route,embedding_route,route_gap",
            &rows,
        )
        .ok();
    let worst =
        (0..grid.len()).map(|k| (conn.value(k) - emb.value(k)).abs()).fold(0.0_f64, f64::max);
    writer.check(
        "integrate_routes_finite",
        worst.is_finite(),
        format!("integrand {field_name}, sup route gap {}", fcol(worst)),
    );
    Ok(())
}

pub fn metrics(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<(), ConfigError> {
    let eps = config.epsilons[0];
    let grid = Arc::new(TimeGrid::uniform(config.martingale.horizon, config.grid_steps)?);
    let pairs: Vec<Result<_, geojump::Error>> =
        par_paths(config.base_seed, config.paths, |s, _| {
            let pair = build_coupled_pair(&config.martingale, eps, &grid, s)?;
            let diff = pair.base.path.difference(&pair.perturbed.path)?;
            let dx = geojump::martingales::canonical_decomposition_all(&pair.base)?;
            let dy = geojump::martingales::canonical_decomposition_all(&pair.perturbed)?;
            let coords: Vec<_> = dx
                .iter()
                .zip(&dy)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<_, geojump::Error>>()?;
            Ok((diff, coords))
        });
    let pairs: Vec<(CadlagPath, Vec<geojump::calculus::SemimartingaleDecomposition>)> =
        pairs.into_iter().collect::<Result<_, geojump::Error>>()?;

    let diffs: Vec<CadlagPath> = pairs.iter().map(|p| p.0.clone()).collect();
    let r = ucp_metric(&diffs)?;
    let rhat = rhat_lower(&diffs, &default_dictionary(config.manifold.ambient_dim()))?;
    let samples: Vec<HpSample<'_>> = pairs
        .iter()
        .map(|(path, coords)| HpSample { path, coords: coords.as_slice() })
        .collect();
    let hp = hp_norm_upper(&samples, config.p, config.martingale.horizon)?;

    writer.write_json("metric_r_ucp.json", &r).ok();
    writer.write_json("metric_rhat_lower.json", &rhat).ok();
    writer.write_json("metric_hp_upper.json", &hp).ok();
    writer.check(
        "metrics_reported",
        true,
        format!(
            "eps {}: r {} ± {}, rhat_lb {} ± {}, hp_ub {} ± {}",
            fcol(eps),
            fcol(r.estimate),
            fcol(r.standard_error),
            fcol(rhat.estimate),
            fcol(rhat.standard_error),
            fcol(hp.estimate),
            fcol(hp.standard_error)
        ),
    );
    Ok(())
}
