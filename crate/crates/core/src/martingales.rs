//! Constructors for manifold-valued martingales with end points, coupled
//! converging families, and a statistical martingale-property tester.
//!
//! The construction is martingale-by-symmetry: every move is a geodesic
//! step along a direction drawn uniformly on the unit tangent sphere, so
//! the conditional mean of each ambient increment points along the normal
//! directions and every tangential test integral has exactly zero-mean
//! increments. No compensator subtraction, no projection error.
//!
//! Killing (rate κ > 0) jumps the path to the trap and freezes it. A raw
//! killing jump has a nonzero tangential conditional mean, so killed paths
//! are excluded from the martingale-labeled machinery (the statistic and
//! the canonical decomposition) and only run through shape, detection and
//! localization checks.

use crate::error::{Error, Result};
use crate::geometry::{Catalog, EmbeddedManifold};
use crate::linalg;
use crate::paths::{CadlagPath, TimeGrid};
use crate::seeding::{stream_rng, Stream};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::sync::Arc;

/// Law of the geodesic jump angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngleLaw {
    Fixed(f64),
    /// Uniform on `[0, θ_max]`.
    Uniform(f64),
}

impl AngleLaw {
    pub fn max_angle(&self) -> f64 {
        match self {
            AngleLaw::Fixed(t) | AngleLaw::Uniform(t) => *t,
        }
    }

    /// `E[cos Θ]` in closed form.
    pub fn mean_cos(&self) -> f64 {
        match self {
            AngleLaw::Fixed(t) => t.cos(),
            AngleLaw::Uniform(t) => {
                if *t == 0.0 {
                    1.0
                } else {
                    t.sin() / t
                }
            }
        }
    }

    fn draw(&self, u: f64) -> f64 {
        match self {
            AngleLaw::Fixed(t) => *t,
            AngleLaw::Uniform(t) => u * t,
        }
    }

    /// The law with all angles multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> AngleLaw {
        match self {
            AngleLaw::Fixed(t) => AngleLaw::Fixed(scale * t),
            AngleLaw::Uniform(t) => AngleLaw::Uniform(scale * t),
        }
    }
}

/// Largest ambient jump size produced by angles in `[0, θ]`.
fn chord_sup(theta: f64) -> f64 {
    if theta >= std::f64::consts::PI {
        2.0
    } else {
        2.0 * (theta / 2.0).sin()
    }
}

/// Specification of a geodesic-jump martingale with an end point.
#[derive(Clone, Debug)]
pub struct JumpMartingaleSpec {
    pub manifold: EmbeddedManifold,
    pub start: Vec<f64>,
    /// Jump events per unit time (λ).
    pub jump_rate: f64,
    pub angle_law: AngleLaw,
    /// Tangent random-walk scale per grid step (δ): between events the path
    /// takes geodesic steps of arc length δ√Δt.
    pub walk_scale: f64,
    /// Killing rate (κ); 0 keeps the path alive forever.
    pub kill_rate: f64,
    pub horizon: f64,
    /// Cap on ambient jump sizes (α).
    pub jump_cap: f64,
    /// Bound on the start point norm (β).
    pub start_bound: f64,
}

impl JumpMartingaleSpec {
    /// Fixed-angle spec with the angle chosen to make the jump cap sharp:
    /// θ = 2 arcsin(α/2).
    pub fn sharp_cap(
        manifold: EmbeddedManifold,
        start: Vec<f64>,
        jump_rate: f64,
        walk_scale: f64,
        horizon: f64,
        jump_cap: f64,
    ) -> Self {
        let theta = 2.0 * (jump_cap / 2.0).asin();
        Self {
            manifold,
            start,
            jump_rate,
            angle_law: AngleLaw::Fixed(theta),
            walk_scale,
            kill_rate: 0.0,
            horizon,
            jump_cap,
            start_bound: 0.0,
        }
        .with_tight_start_bound()
    }

    pub fn with_tight_start_bound(mut self) -> Self {
        self.start_bound = linalg::norm(&self.start);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.check_on_manifold(&self.start)?;
        if !(self.jump_rate >= 0.0 && self.walk_scale >= 0.0 && self.kill_rate >= 0.0) {
            return Err(Error::InvalidParam("rates and scales must be nonnegative".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParam("horizon must be positive".into()));
        }
        if self.angle_law.max_angle() < 0.0 {
            return Err(Error::InvalidParam("jump angle must be nonnegative".into()));
        }
        let chord = chord_sup(self.angle_law.max_angle());
        if chord > self.jump_cap + 1e-12 {
            return Err(Error::JumpCapViolated { got: chord, cap: self.jump_cap });
        }
        if linalg::norm(&self.start) > self.start_bound + 1e-12 {
            return Err(Error::InvalidParam(format!(
                "|x₀| = {} exceeds the start bound β = {}",
                linalg::norm(&self.start),
                self.start_bound
            )));
        }
        Ok(())
    }
}

/// What happened at each grid step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Hold,
    Walk,
    Jump,
    Kill,
}

/// A constructed martingale path with its event log (the provenance the
/// canonical decomposition needs).
#[derive(Clone, Debug)]
pub struct JumpMartingale {
    pub path: CadlagPath,
    pub log: Vec<StepKind>,
    pub spec: JumpMartingaleSpec,
    /// Multiplier applied to every jump angle (1 for unperturbed paths);
    /// the effective angle law is `spec.angle_law.scaled(angle_scale)`.
    pub angle_scale: f64,
}

/// Two paths built from identical random primitives with jump angles
/// scaled by 1 and 1+ε.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub base: JumpMartingale,
    pub perturbed: JumpMartingale,
    pub epsilon: f64,
}

struct EventDraw {
    direction_seed_vector: Vec<f64>,
    angle_uniform: f64,
}

/// Shared random primitives for one path seed: jump events rounded to the
/// grid (with collision cascade), walk direction vectors, and the killing
/// index.
struct Primitives {
    /// `events[k]` is the event landing at grid index k, if any.
    events: Vec<Option<EventDraw>>,
    kill_index: Option<usize>,
}

fn draw_primitives(
    spec: &JumpMartingaleSpec,
    grid: &Arc<TimeGrid>,
    seed: u64,
) -> Result<Primitives> {
    let n = grid.len();
    let d = spec.manifold.ambient_dim();

    // At most one event per grid cell needs λ·Δt small; enforced.
    if spec.jump_rate > 0.0 {
        let max_dt = (1..n).map(|k| grid.dt(k)).fold(0.0_f64, f64::max);
        if spec.jump_rate * max_dt >= 0.1 {
            return Err(Error::InvalidParam(format!(
                "grid too coarse: λ·Δt = {:.3} must stay below 0.1",
                spec.jump_rate * max_dt
            )));
        }
    }

    let mut events: Vec<Option<EventDraw>> = (0..n).map(|_| None).collect();
    if spec.jump_rate > 0.0 {
        let mut rng = stream_rng(seed, Stream::Events);
        let mut t = 0.0;
        loop {
            let e: f64 = Exp1.sample(&mut rng);
            t += e / spec.jump_rate;
            if t > grid.horizon() {
                break;
            }
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let u: f64 = rng.random_range(0.0..1.0);
            // Events land at the enclosing grid point; a second event in an
            // occupied cell cascades to the next free one.
            let mut k = grid.index_at_or_after(t).max(1);
            while k < n && events[k].is_some() {
                k += 1;
            }
            if k < n {
                events[k] = Some(EventDraw { direction_seed_vector: g, angle_uniform: u });
            }
        }
    }

    let kill_index = if spec.kill_rate > 0.0 {
        let mut rng = stream_rng(seed, Stream::Kill);
        let e: f64 = Exp1.sample(&mut rng);
        let zeta = e / spec.kill_rate;
        let k = grid.index_at_or_after(zeta).max(1);
        if k < n {
            Some(k)
        } else {
            None
        }
    } else {
        None
    };

    Ok(Primitives { events, kill_index })
}

/// Unit tangent direction from a shared ambient Gaussian: project onto the
/// tangent space at `x` and normalize. The projected Gaussian is uniform on
/// the unit tangent sphere; a degenerate projection (measure zero) falls
/// back to a fixed tangent frame direction.
fn tangent_direction(m: &EmbeddedManifold, x: &[f64], g: &[f64]) -> Vec<f64> {
    let mut v = g.to_vec();
    m.project_tangent(x, &mut v);
    if linalg::normalize(&mut v, 1e-12) > 1e-12 {
        return v;
    }
    for i in 0..m.ambient_dim() {
        let mut e = vec![0.0; m.ambient_dim()];
        e[i] = 1.0;
        m.project_tangent(x, &mut e);
        if linalg::normalize(&mut e, 0.1) > 0.1 {
            return e;
        }
    }
    unreachable!("tangent spaces of catalog manifolds are nontrivial");
}

/// Build a family of paths from identical primitives, one per jump-angle
/// scale. Scale 1 is the unperturbed path; ε-couplings use 1 + ε.
pub fn build_coupled_family(
    spec: &JumpMartingaleSpec,
    scales: &[f64],
    grid: &Arc<TimeGrid>,
    seed: u64,
    bias: Option<&DirectionBias>,
) -> Result<Vec<JumpMartingale>> {
    spec.validate()?;
    for &s in scales {
        if s < 0.0 {
            return Err(Error::InvalidParam("angle scale must be nonnegative".into()));
        }
        let chord = chord_sup(s * spec.angle_law.max_angle());
        if chord > spec.jump_cap + 1e-12 {
            return Err(Error::JumpCapViolated { got: chord, cap: spec.jump_cap });
        }
    }
    let m = &spec.manifold;
    let d = m.ambient_dim();
    let n = grid.len();
    let prim = draw_primitives(spec, grid, seed)?;
    let mut walk_rng = stream_rng(seed, Stream::Walk);

    let mut states: Vec<Vec<f64>> = vec![spec.start.clone(); scales.len()];
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(n * d); scales.len()];
    for (si, v) in values.iter_mut().enumerate() {
        v.extend_from_slice(&states[si]);
    }
    let mut flags = vec![false; n];
    let mut log = vec![StepKind::Hold; n];

    let mut walk_g = vec![0.0; d];
    for k in 1..n {
        if Some(k) == prim.kill_index {
            flags[k] = true;
            log[k] = StepKind::Kill;
            for (si, v) in values.iter_mut().enumerate() {
                v.extend_from_slice(m.trap());
                states[si].copy_from_slice(m.trap());
            }
            // Frozen at the trap from here on.
            for kk in k + 1..n {
                log[kk] = StepKind::Hold;
                for v in values.iter_mut() {
                    v.extend_from_slice(m.trap());
                }
            }
            break;
        }
        if let Some(ev) = &prim.events[k] {
            flags[k] = true;
            log[k] = StepKind::Jump;
            let theta = spec.angle_law.draw(ev.angle_uniform);
            for (si, &scale) in scales.iter().enumerate() {
                let x = &states[si];
                let mut dir = tangent_direction(m, x, &ev.direction_seed_vector);
                if let Some(b) = bias {
                    dir = b.apply(m, x, &dir);
                }
                let next = m.geodesic_step_unchecked(x, &dir, scale * theta);
                values[si].extend_from_slice(&next);
                states[si] = next;
            }
        } else if spec.walk_scale > 0.0 {
            log[k] = StepKind::Walk;
            let h = spec.walk_scale * grid.dt(k).sqrt();
            for gi in walk_g.iter_mut() {
                *gi = StandardNormal.sample(&mut walk_rng);
            }
            for (si, _) in scales.iter().enumerate() {
                let x = &states[si];
                let mut dir = tangent_direction(m, x, &walk_g);
                if let Some(b) = bias {
                    dir = b.apply(m, x, &dir);
                }
                let next = m.geodesic_step_unchecked(x, &dir, h);
                values[si].extend_from_slice(&next);
                states[si] = next;
            }
        } else {
            log[k] = StepKind::Hold;
            for (si, v) in values.iter_mut().enumerate() {
                let x = states[si].clone();
                v.extend_from_slice(&x);
            }
        }
    }

    let kill = prim.kill_index;
    scales
        .iter()
        .enumerate()
        .map(|(si, &scale)| {
            let path = CadlagPath::new(
                grid.clone(),
                d,
                std::mem::take(&mut values[si]),
                flags.clone(),
                kill,
                m.trap().to_vec(),
            )?;
            Ok(JumpMartingale { path, log: log.clone(), spec: spec.clone(), angle_scale: scale })
        })
        .collect()
}

/// A deterministic tangential drift mixed into every direction draw; breaks
/// the martingale property on purpose (negative controls).
#[derive(Clone, Debug)]
pub struct DirectionBias {
    pub ambient_direction: Vec<f64>,
    pub strength: f64,
}

impl DirectionBias {
    fn apply(&self, m: &EmbeddedManifold, x: &[f64], dir: &[f64]) -> Vec<f64> {
        let mut fixed = self.ambient_direction.clone();
        m.project_tangent(x, &mut fixed);
        let mut out = dir.to_vec();
        if linalg::normalize(&mut fixed, 1e-12) > 1e-12 {
            linalg::axpy(&mut out, self.strength, &fixed);
            linalg::normalize(&mut out, 1e-12);
        }
        out
    }
}

/// Geodesic-jump martingale: Poisson(λ) geodesic jumps with uniform tangent
/// directions, a tangent random walk between events, optional killing.
pub fn build_geodesic_jump_martingale(
    spec: &JumpMartingaleSpec,
    grid: &Arc<TimeGrid>,
    seed: u64,
) -> Result<JumpMartingale> {
    Ok(build_coupled_family(spec, &[1.0], grid, seed, None)?.pop().unwrap())
}

/// Biased variant for power checks of the martingale tester.
pub fn build_biased_jump_martingale(
    spec: &JumpMartingaleSpec,
    grid: &Arc<TimeGrid>,
    seed: u64,
    bias: &DirectionBias,
) -> Result<JumpMartingale> {
    Ok(build_coupled_family(spec, &[1.0], grid, seed, Some(bias))?.pop().unwrap())
}

/// Coupled pair with angle scales `(1, 1+ε)` from shared primitives.
pub fn build_coupled_pair(
    spec: &JumpMartingaleSpec,
    epsilon: f64,
    grid: &Arc<TimeGrid>,
    seed: u64,
) -> Result<CoupledPair> {
    if epsilon < 0.0 {
        return Err(Error::InvalidParam("epsilon must be nonnegative".into()));
    }
    let mut fam = build_coupled_family(spec, &[1.0, 1.0 + epsilon], grid, seed, None)?;
    let perturbed = fam.pop().unwrap();
    let base = fam.pop().unwrap();
    Ok(CoupledPair { base, perturbed, epsilon })
}

/// Closed-form canonical decomposition of a constructed path's coordinate:
/// the finite-variation part collects the conditional means of the ambient
/// increments (normal components), the martingale part is the rest.
///
/// Jump events contribute `(E[cos Θ] − 1) · X^i_{k−1}`, walk steps
/// `(cos(δ√Δt) − 1) · X^i_{k−1}`. Sphere catalog only (the construction's
/// conditional means are radial only there); killed paths are unsupported
/// because the killing jump is not mean-zero.
pub fn canonical_decomposition(
    mart: &JumpMartingale,
    coord: usize,
) -> Result<crate::calculus::SemimartingaleDecomposition> {
    let m = &mart.spec.manifold;
    if m.catalog() != Catalog::Sphere {
        return Err(Error::Unsupported(
            "canonical decomposition is defined for the sphere catalog".into(),
        ));
    }
    if mart.log.contains(&StepKind::Kill) {
        return Err(Error::Unsupported(
            "killed paths have no martingale canonical decomposition (κ > 0)".into(),
        ));
    }
    let path = &mart.path;
    let grid = path.grid();
    let n = path.len();
    let mean_cos_jump = mart.spec.angle_law.scaled(mart.angle_scale).mean_cos();
    let mut a = vec![0.0; n];
    let mut mvals = vec![0.0; n];
    let x0 = path.value(0)[coord];
    for k in 1..n {
        let left = path.value(k - 1)[coord];
        let a_inc = match mart.log[k] {
            StepKind::Jump => (mean_cos_jump - 1.0) * left,
            StepKind::Walk => {
                let h = mart.spec.walk_scale * grid.dt(k).sqrt();
                (h.cos() - 1.0) * left
            }
            StepKind::Hold => 0.0,
            StepKind::Kill => unreachable!(),
        };
        a[k] = a[k - 1] + a_inc;
        mvals[k] = path.value(k)[coord] - x0 - a[k];
    }
    let source = crate::calculus::RealPath::new(
        grid.clone(),
        path.coordinate(coord),
        path.jump_flags().to_vec(),
    )?;
    let mpath = crate::calculus::RealPath::new(grid.clone(), mvals, path.jump_flags().to_vec())?;
    let apath = crate::calculus::RealPath::new(grid.clone(), a, vec![false; n])?;
    crate::calculus::SemimartingaleDecomposition::new(&source, mpath, apath)
}

/// Canonical decompositions for every coordinate.
pub fn canonical_decomposition_all(
    mart: &JumpMartingale,
) -> Result<Vec<crate::calculus::SemimartingaleDecomposition>> {
    (0..mart.path.dim()).map(|i| canonical_decomposition(mart, i)).collect()
}

/// One row of the martingale test: a tangential field integral, a
/// predictable integrand from the dictionary and a checkpoint.
#[derive(Clone, Debug)]
pub struct MartingaleTestRow {
    pub field: usize,
    pub strategy: &'static str,
    pub checkpoint: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub tstat: f64,
}

#[derive(Clone, Debug)]
pub struct MartingaleTestReport {
    /// max over rows of |mean| / SE; < 3 is "consistent with martingale".
    pub statistic: f64,
    pub rows: Vec<MartingaleTestRow>,
    pub sample_count: usize,
}

const STRATEGIES: [&str; 3] = ["const", "sign_last", "first_half"];

/// Statistical martingale-property test. For every coordinate vector field
/// `X_i(x) = Π_x e_i`, every predictable test process `H` in
/// {1, sign of last increment, first-half window} and every checkpoint, it
/// pools `∫ H d(∫⟨X_i(X_−), dX⟩)` across the ensemble and standardizes the
/// mean. Exactly zero-mean constructions stay below 3; drifts show up fast.
pub fn martingale_statistic(
    paths: &[CadlagPath],
    m: &EmbeddedManifold,
    checkpoints: &[f64],
) -> Result<MartingaleTestReport> {
    if paths.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if checkpoints.is_empty() {
        return Err(Error::InvalidParam("at least one checkpoint is needed".into()));
    }
    let d = m.ambient_dim();
    let grid = paths[0].grid();
    let half = grid.horizon() / 2.0;
    let check_idx: Vec<usize> =
        checkpoints.iter().map(|t| grid.index_at_or_before(*t)).collect();

    // samples[field][strategy][checkpoint][path]
    let mut samples =
        vec![vec![vec![Vec::with_capacity(paths.len()); check_idx.len()]; 3]; d];

    let mut buf = vec![0.0; d];
    for path in paths {
        if !(Arc::ptr_eq(path.grid(), grid) || path.grid() == grid) {
            return Err(Error::GridMismatch);
        }
        let mut z = vec![[0.0_f64; 3]; d];
        let mut last_dy = vec![0.0_f64; d];
        let mut out = vec![vec![[0.0_f64; 3]; check_idx.len()]; d];
        for k in 1..path.len() {
            path.increment_into(k, &mut buf);
            if buf.iter().any(|v| *v != 0.0) {
                let left = path.value(k - 1);
                let mut proj = buf.clone();
                m.project_tangent(left, &mut proj);
                let t_left = grid.times()[k - 1];
                for i in 0..d {
                    let dy = proj[i];
                    z[i][0] += dy;
                    z[i][1] += if last_dy[i] >= 0.0 { dy } else { -dy };
                    if t_left <= half {
                        z[i][2] += dy;
                    }
                    last_dy[i] = dy;
                }
            }
            for (ci, &ki) in check_idx.iter().enumerate() {
                if ki == k {
                    for i in 0..d {
                        out[i][ci] = z[i];
                    }
                }
            }
        }
        // Checkpoints at index 0 record zero; fill any checkpoint that the
        // loop did not reach (can only be index 0).
        for (ci, &ki) in check_idx.iter().enumerate() {
            if ki == 0 {
                for i in 0..d {
                    out[i][ci] = [0.0; 3];
                }
            }
            for i in 0..d {
                for s in 0..3 {
                    samples[i][s][ci].push(out[i][ci][s]);
                }
            }
        }
    }

    let mut rows = Vec::new();
    let mut statistic = 0.0_f64;
    for i in 0..d {
        for (s, name) in STRATEGIES.iter().enumerate() {
            for (ci, t) in checkpoints.iter().enumerate() {
                let (mean, se) = crate::stats::mean_and_se(&samples[i][s][ci]);
                let tstat = if se > 0.0 {
                    mean.abs() / se
                } else if mean == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                statistic = statistic.max(tstat);
                rows.push(MartingaleTestRow {
                    field: i,
                    strategy: name,
                    checkpoint: *t,
                    mean,
                    standard_error: se,
                    tstat,
                });
            }
        }
    }
    Ok(MartingaleTestReport { statistic, rows, sample_count: paths.len() })
}

/// Pathwise membership checks for the martingale class of the main
/// estimates: the stopped path stays in the R-ball (by construction of the
/// exit time), jumps respect the cap, and the start point respects β.
pub fn check_class_membership(
    mart: &JumpMartingale,
    stop_index: usize,
    radius: f64,
) -> Result<()> {
    let path = &mart.path;
    let m = &mart.spec.manifold;
    let start_embedded = m.extension_value(path.value(0));
    let stop = stop_index.min(path.len() - 1);
    let mut buf = vec![0.0; path.dim()];
    for k in 0..=stop {
        if k < stop_index {
            let emb = m.extension_value(path.value(k));
            let range = linalg::dist(&emb, &start_embedded);
            if range > radius + 1e-12 {
                return Err(Error::InvalidParam(format!(
                    "range condition violated before the exit time: {range} > {radius}"
                )));
            }
        }
        if k >= 1 && path.jump_flag(k) {
            path.increment_into(k, &mut buf);
            let size = linalg::norm(&buf);
            let cap_with_kill = if mart.log[k] == StepKind::Kill {
                // The killing jump is not an on-manifold geodesic jump.
                f64::INFINITY
            } else {
                mart.spec.jump_cap
            };
            if size > cap_with_kill + 1e-12 {
                return Err(Error::JumpCapViolated { got: size, cap: mart.spec.jump_cap });
            }
        }
    }
    if linalg::norm(path.value(0)) > mart.spec.start_bound + 1e-12 {
        return Err(Error::InvalidParam("start bound violated".into()));
    }
    Ok(())
}
