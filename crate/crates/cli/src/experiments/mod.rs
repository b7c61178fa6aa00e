//! Experiment implementations behind the verify subcommands.
//!
//! Every experiment follows the same discipline: per-path work fans out
//! over a rayon pool, results come back as a `Vec` indexed by path, and
//! reductions run sequentially in index order — so the outputs are
//! byte-identical no matter how many worker threads run.

pub mod corollary;
pub mod drivers;
pub mod hessian;
pub mod lemma31;
pub mod lemma32;
pub mod localize;
pub mod theorem1;

use geojump::seeding::derive_path_seeds;
use rayon::prelude::*;

/// Ordered parallel map over derived per-path seeds.
pub fn par_paths<T: Send>(
    base_seed: u64,
    count: usize,
    f: impl Fn(u64, usize) -> T + Sync,
) -> Vec<T> {
    derive_path_seeds(base_seed, count)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| f(s, i))
        .collect()
}

/// Largest ambient distance between two paths on their shared grid.
pub fn sup_distance(a: &geojump::paths::CadlagPath, b: &geojump::paths::CadlagPath) -> f64 {
    (0..a.len())
        .map(|k| geojump::linalg::dist(a.value(k), b.value(k)))
        .fold(0.0_f64, f64::max)
}

/// Stability summary of a ratio ladder (largest label first).
pub struct LadderStability {
    pub max: f64,
    pub median: f64,
    pub se_max: f64,
    /// |max − median| ≤ 3·SE(max): the literal flatness statistic.
    pub literal_flat: bool,
    /// No row exceeds the largest-label row beyond 3 combined SE: the
    /// anti-blow-up gate.
    pub no_blowup: bool,
}

pub fn ladder_stability(ratios: &[f64], ses: &[f64]) -> LadderStability {
    let max_idx = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let max = ratios[max_idx];
    let se_max = ses[max_idx];
    let median = geojump::stats::median(ratios);
    let literal_flat = (max - median).abs() <= 3.0 * se_max;
    let first = ratios[0];
    let first_se = ses[0];
    let no_blowup = ratios
        .iter()
        .zip(ses)
        .all(|(r, se)| *r <= first + 3.0 * (se + first_se) && r.is_finite() && *r >= 0.0);
    LadderStability { max, median, se_max, literal_flat, no_blowup }
}
