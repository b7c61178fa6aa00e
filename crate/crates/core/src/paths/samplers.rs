//! Seeded driving-noise samplers.

use super::{CadlagPath, TimeGrid};
use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

/// Increments of an α-stable path are flagged as jumps when their magnitude
/// exceeds `JUMP_FLAG_MULTIPLIER · √Δt` (a diffusion-proxy convention for
/// grid-discretized pure-jump drivers).
pub const JUMP_FLAG_MULTIPLIER: f64 = 3.0;

/// Standard Brownian motion on the grid: independent Gaussian increments of
/// variance Δt per coordinate. All jump flags are false.
pub fn sample_brownian(grid: &Arc<TimeGrid>, dim: usize, seed: u64) -> Result<CadlagPath> {
    if dim == 0 {
        return Err(Error::InvalidParam("dimension must be ≥ 1".into()));
    }
    let mut rng = stream_rng(seed, Stream::Driver);
    let n = grid.len();
    let mut values = vec![0.0; n * dim];
    for k in 1..n {
        let sd = grid.dt(k).sqrt();
        for i in 0..dim {
            let g: f64 = StandardNormal.sample(&mut rng);
            values[k * dim + i] = values[(k - 1) * dim + i] + sd * g;
        }
    }
    CadlagPath::new(grid.clone(), dim, values, vec![false; n], None, vec![0.0; dim])
}

/// One standard symmetric α-stable draw (characteristic function
/// `exp(−|ξ|^α)`) by the polar transform.
fn stable_standard<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        return u.tan();
    }
    let su = (alpha * u).sin() / u.cos().powf(1.0 / alpha);
    let tail = ((1.0 - alpha) * u).cos() / w;
    su * tail.powf((1.0 - alpha) / alpha)
}

/// Symmetric α-stable Lévy path scaled so each coordinate of `X_t` has
/// characteristic function `exp(−t |ξ|^α)`. For α < 2 every increment whose
/// magnitude exceeds the diffusion proxy `3√Δt` carries a jump flag.
pub fn sample_alpha_stable(
    grid: &Arc<TimeGrid>,
    dim: usize,
    alpha: f64,
    seed: u64,
) -> Result<CadlagPath> {
    if dim == 0 {
        return Err(Error::InvalidParam("dimension must be ≥ 1".into()));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParam(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    let mut rng = stream_rng(seed, Stream::Driver);
    let n = grid.len();
    let mut values = vec![0.0; n * dim];
    let mut flags = vec![false; n];
    for k in 1..n {
        let dt = grid.dt(k);
        let scale = dt.powf(1.0 / alpha);
        let mut mag2 = 0.0;
        for i in 0..dim {
            let inc = scale * stable_standard(alpha, &mut rng);
            values[k * dim + i] = values[(k - 1) * dim + i] + inc;
            mag2 += inc * inc;
        }
        flags[k] = mag2.sqrt() > JUMP_FLAG_MULTIPLIER * dt.sqrt();
    }
    CadlagPath::new(grid.clone(), dim, values, flags, None, vec![0.0; dim])
}

/// Compound Poisson path: jumps at rate `rate` with centered Gaussian sizes
/// of standard deviation `jump_std` per coordinate; piecewise constant in
/// between, every jump flagged.
pub fn sample_compound_poisson(
    grid: &Arc<TimeGrid>,
    dim: usize,
    rate: f64,
    jump_std: f64,
    seed: u64,
) -> Result<CadlagPath> {
    if dim == 0 {
        return Err(Error::InvalidParam("dimension must be ≥ 1".into()));
    }
    if !(rate >= 0.0) || !(jump_std >= 0.0) {
        return Err(Error::InvalidParam("rate and jump size must be nonnegative".into()));
    }
    let mut events = stream_rng(seed, Stream::Events);
    let n = grid.len();
    let mut values = vec![0.0; n * dim];
    let mut flags = vec![false; n];

    // Exact exponential inter-arrival times rounded up to the grid.
    let mut jump_at = vec![false; n];
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(&mut events);
        if rate == 0.0 {
            break;
        }
        t += e / rate;
        if t > grid.horizon() {
            break;
        }
        let mut k = grid.index_at_or_after(t).max(1);
        while k < n && jump_at[k] {
            k += 1;
        }
        if k < n {
            jump_at[k] = true;
        }
    }

    for k in 1..n {
        for i in 0..dim {
            let prev = values[(k - 1) * dim + i];
            values[k * dim + i] = if jump_at[k] {
                let g: f64 = StandardNormal.sample(&mut events);
                prev + jump_std * g
            } else {
                prev
            };
        }
        flags[k] = jump_at[k];
    }
    CadlagPath::new(grid.clone(), dim, values, flags, None, vec![0.0; dim])
}

/// The Dirichlet-form normalizing constant
/// `c_{m,α} = α 2^{α−2} π^{−(m+2)/2} sin(απ/2) Γ((m+α)/2) Γ(α/2)`.
pub fn c_constant(m: u32, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParam("m must be ≥ 1".into()));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParam(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    use statrs::function::gamma::gamma;
    let md = m as f64;
    Ok(alpha
        * 2.0_f64.powf(alpha - 2.0)
        * PI.powf(-(md + 2.0) / 2.0)
        * (alpha * PI / 2.0).sin()
        * gamma((md + alpha) / 2.0)
        * gamma(alpha / 2.0))
}
