//! Grid-synchronous càdlàg paths with jump bookkeeping and killing.
//!
//! Storage is one ambient value per grid point with a boolean jump flag per
//! increment: flag at `k` means the increment `value[k] − value[k−1]`
//! is a genuine jump rather than diffusion. Left limits follow the
//! convention `X_{t_k−} := values[k−1]`. A killed path is frozen at its
//! trap point from the kill index onward, with the killing increment
//! flagged as a jump.

mod samplers;

pub use samplers::{
    c_constant, sample_alpha_stable, sample_brownian, sample_compound_poisson,
    JUMP_FLAG_MULTIPLIER,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::seeding;
use std::sync::Arc;

/// Strictly increasing time grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::InvalidParam("time grid must start at t₀ = 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam("time grid must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// Uniform grid with `steps` cells on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || steps == 0 {
            return Err(Error::InvalidParam("horizon and step count must be positive".into()));
        }
        let times = (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of grid points (N + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of increments N.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k] - self.times[k - 1]
    }

    /// Smallest index `k` with `t_k ≥ t`, or the infinity sentinel when `t`
    /// lies beyond the horizon.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => k,
            Err(k) => {
                if k >= self.times.len() {
                    self.sentinel()
                } else {
                    k
                }
            }
        }
    }

    /// Largest index `k` with `t_k ≤ t` (clamped to the grid).
    pub fn index_at_or_before(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => k,
            Err(k) => k.saturating_sub(1).min(self.steps()),
        }
    }

    /// One past the grid: the "never" value for stopping indices.
    pub fn sentinel(&self) -> usize {
        self.times.len()
    }
}

/// Discretized càdlàg path in R^d with explicit jump flags and optional
/// killing.
#[derive(Clone, Debug)]
pub struct CadlagPath {
    grid: Arc<TimeGrid>,
    dim: usize,
    /// Row-major (N+1) × d values.
    values: Vec<f64>,
    /// Flag at k: increment k is a jump. Entry 0 is always false.
    jump_flags: Vec<bool>,
    kill_index: Option<usize>,
    trap: Vec<f64>,
}

impl CadlagPath {
    pub fn new(
        grid: Arc<TimeGrid>,
        dim: usize,
        values: Vec<f64>,
        jump_flags: Vec<bool>,
        kill_index: Option<usize>,
        trap: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: values.len() });
        }
        if jump_flags.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: jump_flags.len() });
        }
        if jump_flags[0] {
            return Err(Error::InvalidParam("jump flag at index 0 is meaningless".into()));
        }
        if trap.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: trap.len() });
        }
        let path = Self { grid, dim, values, jump_flags, kill_index, trap };
        path.check_killing_shape()?;
        Ok(path)
    }

    /// Constant path at `x0`.
    pub fn constant(grid: Arc<TimeGrid>, x0: &[f64]) -> Self {
        let n = grid.len();
        let mut values = Vec::with_capacity(n * x0.len());
        for _ in 0..n {
            values.extend_from_slice(x0);
        }
        Self {
            grid,
            dim: x0.len(),
            values,
            jump_flags: vec![false; n],
            kill_index: None,
            trap: vec![0.0; x0.len()],
        }
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at grid index k.
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn value_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn start(&self) -> &[f64] {
        self.value(0)
    }

    pub fn jump_flag(&self, k: usize) -> bool {
        self.jump_flags[k]
    }

    pub fn jump_flags(&self) -> &[bool] {
        &self.jump_flags
    }

    pub fn set_jump_flag(&mut self, k: usize, v: bool) {
        self.jump_flags[k] = v;
    }

    pub fn kill_index(&self) -> Option<usize> {
        self.kill_index
    }

    pub fn trap(&self) -> &[f64] {
        &self.trap
    }

    /// Increment `X_k − X_{k−1}` written into `out`.
    pub fn increment_into(&self, k: usize, out: &mut [f64]) {
        let prev = &self.values[(k - 1) * self.dim..k * self.dim];
        let cur = &self.values[k * self.dim..(k + 1) * self.dim];
        for i in 0..self.dim {
            out[i] = cur[i] - prev[i];
        }
    }

    pub fn same_grid(&self, other: &CadlagPath) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Definition of a path with an end point: frozen at the trap from the
    /// kill index onward.
    pub fn check_killing_shape(&self) -> Result<()> {
        if let Some(kill) = self.kill_index {
            if kill >= self.len() {
                return Err(Error::InvalidParam(
                    "kill index must lie on the grid (use None for never)".into(),
                ));
            }
            for k in kill..self.len() {
                if self.value(k) != self.trap.as_slice() {
                    return Err(Error::InvalidParam(format!(
                        "killed path not frozen at the trap from index {kill} (index {k})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise difference `self − other` on a shared grid. Jump flags are
    /// OR-ed so the quadratic-variation split stays consistent.
    pub fn difference(&self, other: &CadlagPath) -> Result<CadlagPath> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let values: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let jump_flags: Vec<bool> =
            self.jump_flags.iter().zip(&other.jump_flags).map(|(a, b)| *a || *b).collect();
        Ok(CadlagPath {
            grid: self.grid.clone(),
            dim: self.dim,
            values,
            jump_flags,
            kill_index: None,
            trap: vec![0.0; self.dim],
        })
    }

    /// Path stopped at grid index `tau` (values frozen from `tau` onward,
    /// later flags cleared). `tau` at or past the sentinel returns a clone.
    pub fn stopped(&self, tau: usize) -> CadlagPath {
        let mut out = self.clone();
        if tau >= self.len() {
            return out;
        }
        let frozen = self.value(tau).to_vec();
        for k in tau + 1..self.len() {
            out.value_mut(k).copy_from_slice(&frozen);
            out.jump_flags[k] = false;
        }
        if let Some(kill) = self.kill_index {
            out.kill_index = if kill <= tau { Some(kill) } else { None };
        }
        // A path stopped strictly before its kill never reaches the trap,
        // so the shape invariant still holds.
        out
    }

    /// Scalar coordinate as a value vector (for hand-built real paths).
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)[i]).collect()
    }

    /// Map through the manifold extension ῑ (or any pointwise map).
    pub fn map_values(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> CadlagPath {
        let mut out = self.clone();
        for k in 0..self.len() {
            let v = f(self.value(k));
            out.value_mut(k).copy_from_slice(&v);
        }
        out
    }

    /// Running supremum of |X_t| over grid indices `0..=k` for each k.
    pub fn prefix_sup_norm(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = 0.0_f64;
        for k in 0..self.len() {
            cur = cur.max(linalg::norm(self.value(k)));
            out.push(cur);
        }
        out
    }
}

/// First grid index at which the path leaves the closed ball, or the
/// sentinel if it never does. Non-anticipating: depends only on values up
/// to the returned index.
pub fn first_exit_time(path: &CadlagPath, center: &[f64], radius: f64) -> usize {
    first_exit_after(path, 0, center, radius)
}

/// First exit from the ball at an index ≥ `start`.
pub fn first_exit_after(path: &CadlagPath, start: usize, center: &[f64], radius: f64) -> usize {
    for k in start..path.len() {
        if linalg::dist(path.value(k), center) > radius {
            return k;
        }
    }
    path.grid().sentinel()
}

/// Freeze the path at the trap from `kill_index` on; the killing increment
/// is flagged as a jump. A `kill_index` at or past the sentinel returns the
/// path unchanged.
pub fn apply_killing(path: &CadlagPath, kill_index: usize, trap: &[f64]) -> CadlagPath {
    let mut out = path.clone();
    if kill_index >= path.len() {
        return out;
    }
    out.trap = trap.to_vec();
    out.kill_index = Some(kill_index);
    for k in kill_index..path.len() {
        out.value_mut(k).copy_from_slice(trap);
        out.jump_flags[k] = false;
    }
    if kill_index > 0 {
        out.jump_flags[kill_index] = true;
    }
    out
}

/// First index at which the path is off the manifold (the detection scan
/// behind killing times: the limit path leaves M exactly when it is
/// absorbed, because M is closed and the trap is away from it).
pub fn detect_killing(path: &CadlagPath, m: &crate::geometry::EmbeddedManifold) -> Option<usize> {
    (0..path.len()).find(|&k| !m.is_on_manifold(path.value(k)))
}

/// Stopping rules evaluated pathwise. Every rule is non-anticipating: the
/// result depends only on the path up to the returned index.
#[derive(Clone, Debug)]
pub enum StoppingRule {
    /// First exit from a closed ball, scanning from `start`.
    FirstExitBall { center: Vec<f64>, radius: f64, start: usize },
    /// First exit from a union of same-radius closed balls.
    FirstExitSet { centers: Vec<Vec<f64>>, radius: f64, start: usize },
    /// Fixed grid index.
    Deterministic { index: usize },
    /// Earliest of the component rules.
    Composite { rules: Vec<StoppingRule> },
}

impl StoppingRule {
    pub fn evaluate(&self, path: &CadlagPath) -> usize {
        match self {
            StoppingRule::FirstExitBall { center, radius, start } => {
                first_exit_after(path, *start, center, *radius)
            }
            StoppingRule::FirstExitSet { centers, radius, start } => {
                for k in *start..path.len() {
                    let inside =
                        centers.iter().any(|c| linalg::dist(path.value(k), c) <= *radius);
                    if !inside {
                        return k;
                    }
                }
                path.grid().sentinel()
            }
            StoppingRule::Deterministic { index } => (*index).min(path.grid().sentinel()),
            StoppingRule::Composite { rules } => rules
                .iter()
                .map(|r| r.evaluate(path))
                .min()
                .unwrap_or_else(|| path.grid().sentinel()),
        }
    }
}

/// An i.i.d. collection of paths with per-path seeds derived from one base
/// seed; the Monte Carlo unit.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    paths: Vec<CadlagPath>,
    base_seed: u64,
    per_path_seeds: Vec<u64>,
}

impl PathEnsemble {
    /// Build `count` paths from a seeded generator. Per-path seeds are a
    /// pure function of the base seed and pairwise distinct.
    pub fn generate(
        base_seed: u64,
        count: usize,
        mut build: impl FnMut(u64, usize) -> Result<CadlagPath>,
    ) -> Result<Self> {
        let per_path_seeds = seeding::derive_path_seeds(base_seed, count);
        let mut paths = Vec::with_capacity(count);
        for (i, &s) in per_path_seeds.iter().enumerate() {
            paths.push(build(s, i)?);
        }
        Ok(Self { paths, base_seed, per_path_seeds })
    }

    pub fn from_paths(base_seed: u64, paths: Vec<CadlagPath>) -> Self {
        let per_path_seeds = seeding::derive_path_seeds(base_seed, paths.len());
        Self { paths, base_seed, per_path_seeds }
    }

    pub fn paths(&self) -> &[CadlagPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn per_path_seeds(&self) -> &[u64] {
        &self.per_path_seeds
    }
}
