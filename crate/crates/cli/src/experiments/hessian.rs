//! Randomized verification of the pair-energy Hessian inequality
//! `[uᵀ vᵀ] Hess h(w,z) [u; v] ≥ |u − v|²` for `h(w,z) = e^{|z−w|²} − 1`,
//! sampled over the region `|z − w| ≤ 2(R + α)` the quadratic-variation
//! difference bound works in.

use geojump::seeding::{stream_rng, Stream};
use geojump::{linalg, separation};
use rand::Rng;
use rayon::prelude::*;

pub struct HessianCheck {
    pub samples: usize,
    pub violations: usize,
    /// min over samples of (form − |u−v|²); nonnegative up to float slack.
    pub worst_margin: f64,
}

pub fn verify_hessian_bound(
    samples: usize,
    radius: f64,
    alpha: f64,
    dim: usize,
    base_seed: u64,
) -> HessianCheck {
    let chunks = 64usize;
    let per_chunk = samples.div_ceil(chunks);
    let cap = 2.0 * (radius + alpha);
    let results: Vec<(usize, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(base_seed.wrapping_add(c as u64), Stream::Driver);
            let mut violations = 0usize;
            let mut worst = f64::INFINITY;
            for _ in 0..per_chunk {
                let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut z: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let gap = linalg::dist(&w, &z);
                if gap > cap {
                    let shrink = cap / gap * rng.random_range(0.05..1.0);
                    for i in 0..dim {
                        z[i] = w[i] + (z[i] - w[i]) * shrink;
                    }
                }
                let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                let form = separation::hessian_form(&w, &z, &u, &v);
                let floor = linalg::dist(&u, &v).powi(2);
                let margin = form - floor;
                if margin < worst {
                    worst = margin;
                }
                if margin < -1e-12 {
                    violations += 1;
                }
            }
            (violations, worst)
        })
        .collect();
    let violations = results.iter().map(|r| r.0).sum();
    let worst_margin = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    HessianCheck { samples: per_chunk * chunks, violations, worst_margin }
}
