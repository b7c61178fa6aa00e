//! The main inequality, instrumented: per coupling scale ε,
//!
//! ```text
//! numerator   = (Σ_i Ê[ |Δῑ^i(X₀,Y₀)|^p + [ΔN_i]^{p/2}_{t∧τ} + (∫|d(ΔA_i+ΔB_i)|)^p ])^{1/p}
//! denominator = Ê[(sup_{s≤t∧τ} |ῑ(X_s) − ῑ(Y_s)|)^{2p}]^{1/(4p)}
//! ```
//!
//! with (N, A, B) the explicit coordinate decompositions of both paths and
//! Δ the member-wise difference — the one-decomposition H^p upper bound
//! that the sup-distance moment controls.
//!
//! The ratio ladder is checked for blow-up as ε → 0: the maximum must sit
//! at the largest sup-distance within noise. (For this coupled family the
//! ratio provably shrinks like ~√ε — the numerator is a p-th-moment
//! functional while the denominator is a 2p-th-moment root — so a flat
//! table is not the expected shape; growth toward small ε would be.)

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiments::{ladder_stability, par_paths, sup_distance};
use crate::report::{fcol, RunWriter};
use geojump::calculus::{embed_path, theorem_decomposition_all};
use geojump::martingales::build_coupled_pair;
use geojump::paths::{first_exit_time, TimeGrid};
use geojump::stats;
use std::sync::Arc;

/// Per-pair components: [Σ_i (x0^p + qv^{p/2} + tv^p), sup^{2p}].
fn pair_components(
    config: &ExperimentConfig,
    eps: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ConfigError> {
    let spec = &config.martingale;
    let grid = Arc::new(TimeGrid::uniform(spec.horizon, config.grid_steps)?);
    let p = config.p;
    let d = config.manifold.ambient_dim();
    let rows: Vec<Result<Vec<f64>, geojump::Error>> = par_paths(seed, count, |s, _| {
        let pair = build_coupled_pair(spec, eps, &grid, s)?;
        let ex = embed_path(&config.manifold, &pair.base.path);
        let ey = embed_path(&config.manifold, &pair.perturbed.path);
        let tau = first_exit_time(&ex, ex.value(0), config.radius)
            .min(first_exit_time(&ey, ey.value(0), config.radius));
        let kend = tau.min(grid.len() - 1);

        let px = theorem_decomposition_all(&config.manifold, &pair.base.path, None)?;
        let py = theorem_decomposition_all(&config.manifold, &pair.perturbed.path, None)?;
        let mut num_v = 0.0;
        for i in 0..d {
            let (nx, ax, bx) = &px[i];
            let (ny, ay, by) = &py[i];
            let x0_gap = (ex.value(0)[i] - ey.value(0)[i]).abs();
            let mut qv = 0.0;
            let mut tv = 0.0;
            for k in 1..=kend {
                let dn = (nx.value(k) - nx.value(k - 1)) - (ny.value(k) - ny.value(k - 1));
                qv += dn * dn;
                let fva = (ax.value(k) - ax.value(k - 1)) + (bx.value(k) - bx.value(k - 1));
                let fvb = (ay.value(k) - ay.value(k - 1)) + (by.value(k) - by.value(k - 1));
                tv += (fva - fvb).abs();
            }
            num_v += x0_gap.powf(p) + qv.powf(p / 2.0) + tv.powf(p);
        }
        let sup = sup_distance(&ex.stopped(kend), &ey.stopped(kend));
        Ok(vec![num_v, sup.powf(2.0 * p)])
    });
    rows.into_iter().collect::<Result<_, _>>().map_err(ConfigError::from)
}

pub fn run(config: &ExperimentConfig, writer: &mut RunWriter) -> Result<(), ConfigError> {
    let (bounds, threshold) = crate::experiments::lemma31::small_range_threshold(config)?;
    writer.set_threshold(bounds, threshold);

    let p = config.p;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut ses = Vec::new();
    for &eps in &config.epsilons {
        if eps == 0.0 {
            rows.push(vec![fcol(eps), "skipped".into(), "".into(), "".into(), "".into()]);
            continue;
        }
        let comps = pair_components(config, eps, config.paths, config.base_seed)?;
        let (num, _) = stats::jackknife(&comps, |m| m[0].powf(1.0 / p));
        let (den, _) = stats::jackknife(&comps, |m| m[1].powf(1.0 / (4.0 * p)));
        let (ratio, se) = stats::jackknife(&comps, |m| {
            let den = m[1].powf(1.0 / (4.0 * p));
            if den <= 0.0 {
                0.0
            } else {
                m[0].powf(1.0 / p) / den
            }
        });
        rows.push(vec![fcol(eps), fcol(num), fcol(den), fcol(ratio), fcol(se)]);
        ratios.push(ratio);
        ses.push(se);
    }
    writer
        .write_csv("theorem1_ratio_table.csv", "epsilon,numerator,denominator,ratio,se", &rows)
        .ok();

    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    writer.check(
        "theorem1_rows_finite_positive",
        finite,
        format!("{} ladder rows, all ratios finite and positive", ratios.len()),
    );
    let st = ladder_stability(&ratios, &ses);
    writer.check(
        "theorem1_ratio_no_blowup",
        st.no_blowup,
        format!(
            "H^p upper bound controlled by the sup-distance moment: max ratio {} (frozen-seed baseline), median {}, no upward drift as eps -> 0; literal max-within-3SE-of-median = {}",
            fcol(st.max),
            fcol(st.median),
            st.literal_flat
        ),
    );

    // The class bound β enters thresholds only: on catalog manifolds the
    // start norm is rigid, so doubling β reruns the same paths. Recorded as
    // an explicit independence check.
    let doubled = {
        let mut cfg = config.clone();
        cfg.martingale.start_bound *= 2.0;
        pair_components(&cfg, *config.epsilons.last().unwrap(), config.paths, config.base_seed)?
    };
    let base = pair_components(config, *config.epsilons.last().unwrap(), config.paths, config.base_seed)?;
    let same = doubled
        .iter()
        .zip(&base)
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x == y));
    writer.check(
        "theorem1_beta_independence",
        same,
        "doubling the start-norm bound leaves the ratio table unchanged (catalog manifolds have rigid start norms)"
            .into(),
    );
    Ok(())
}
