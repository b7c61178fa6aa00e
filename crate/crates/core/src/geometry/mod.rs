//! Embedded-manifold primitives for a small catalog of submanifolds of R^d:
//! unit spheres S^{d-1} (d ≥ 2) and flat tori (products of k unit circles in
//! R^{2k}).
//!
//! The catalog keeps every operation in closed form: exact membership tests,
//! exact tangent projections `Π_x`, the chord connection rule
//! `γ(x, y) = Π_x(y − x)`, geodesic steps, and a smooth global extension of
//! the embedding with analytic Jacobian and Hessian. Derivative bounds over
//! ambient balls are estimated by dense deterministic sampling with a safety
//! factor; they feed experiment thresholds, not proofs.

mod bump;
mod cover;
mod extension;

pub use bump::Bump;
pub use cover::{ball_cover, BallCover};

use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use extension::RadialExtension;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Membership tolerance for catalog manifolds.
pub const ON_MANIFOLD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Catalog {
    /// Unit sphere S^{d-1} in R^d.
    Sphere,
    /// Product of k unit circles in R^{2k}.
    Torus,
}

/// An isometrically embedded submanifold of R^d together with the data the
/// calculus needs: a trap point off the manifold and a blend radius for the
/// smooth extension of the embedding.
#[derive(Clone, Debug)]
pub struct EmbeddedManifold {
    catalog: Catalog,
    ambient_dim: usize,
    trap: Vec<f64>,
    radial: RadialExtension,
}

impl EmbeddedManifold {
    /// Unit sphere S^{d-1} ⊂ R^d with the trap at the origin and the default
    /// blend radius 1/2.
    pub fn sphere(ambient_dim: usize) -> Result<Self> {
        Self::with_options(Catalog::Sphere, ambient_dim, None, 0.5)
    }

    /// Flat torus (k unit circles) in R^{2k}, trap at the origin.
    pub fn torus(factors: usize) -> Result<Self> {
        Self::with_options(Catalog::Torus, 2 * factors, None, 0.5)
    }

    pub fn with_options(
        catalog: Catalog,
        ambient_dim: usize,
        trap: Option<Vec<f64>>,
        blend_radius: f64,
    ) -> Result<Self> {
        match catalog {
            Catalog::Sphere if ambient_dim < 2 => {
                return Err(Error::InvalidParam("sphere needs ambient dimension ≥ 2".into()));
            }
            Catalog::Torus if ambient_dim < 2 || !ambient_dim.is_multiple_of(2) => {
                return Err(Error::InvalidParam(
                    "torus needs an even ambient dimension ≥ 2".into(),
                ));
            }
            _ => {}
        }
        if !(blend_radius > 0.0 && blend_radius < 1.0) {
            // The closest-point map of both catalog manifolds is smooth only
            // at distance < 1 from the manifold.
            return Err(Error::InvalidParam("blend radius must lie in (0, 1)".into()));
        }
        let trap = trap.unwrap_or_else(|| vec![0.0; ambient_dim]);
        if trap.len() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, got: trap.len() });
        }
        let m = Self {
            catalog,
            ambient_dim,
            trap,
            radial: RadialExtension::new(blend_radius),
        };
        let trap_dist = m.manifold_distance(&m.trap);
        if trap_dist <= blend_radius {
            return Err(Error::InvalidParam(format!(
                "trap must lie outside the blend tube: dist {trap_dist:.3} ≤ blend {blend_radius:.3}"
            )));
        }
        Ok(m)
    }

    pub fn catalog(&self) -> Catalog {
        self.catalog
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the manifold itself.
    pub fn intrinsic_dim(&self) -> usize {
        match self.catalog {
            Catalog::Sphere => self.ambient_dim - 1,
            Catalog::Torus => self.ambient_dim / 2,
        }
    }

    pub fn trap(&self) -> &[f64] {
        &self.trap
    }

    pub fn blend_radius(&self) -> f64 {
        self.radial.bump.blend_radius()
    }

    fn blocks(&self) -> usize {
        match self.catalog {
            Catalog::Sphere => 1,
            Catalog::Torus => self.ambient_dim / 2,
        }
    }

    fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        match self.catalog {
            Catalog::Sphere => 0..self.ambient_dim,
            Catalog::Torus => 2 * j..2 * j + 2,
        }
    }

    /// Euclidean distance from `x` to the manifold.
    pub fn manifold_distance(&self, x: &[f64]) -> f64 {
        match self.catalog {
            Catalog::Sphere => (linalg::norm(x) - 1.0).abs(),
            Catalog::Torus => {
                let mut acc = 0.0;
                for j in 0..self.blocks() {
                    let r = linalg::norm(&x[self.block_range(j)]);
                    acc += (r - 1.0) * (r - 1.0);
                }
                acc.sqrt()
            }
        }
    }

    pub fn is_on_manifold(&self, x: &[f64]) -> bool {
        x.len() == self.ambient_dim && self.manifold_distance(x) <= ON_MANIFOLD_TOL
    }

    pub fn check_on_manifold(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: x.len() });
        }
        let dist = self.manifold_distance(x);
        if dist > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { dist, tol: ON_MANIFOLD_TOL });
        }
        Ok(())
    }

    /// Orthogonal projector from R^d onto the tangent space at `x ∈ M`.
    pub fn tangent_projection(&self, x: &[f64]) -> Result<SquareMatrix> {
        self.check_on_manifold(x)?;
        let d = self.ambient_dim;
        let mut p = SquareMatrix::zeros(d);
        match self.catalog {
            Catalog::Sphere => {
                for i in 0..d {
                    for j in 0..d {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        p.set(i, j, delta - x[i] * x[j]);
                    }
                }
            }
            Catalog::Torus => {
                for b in 0..self.blocks() {
                    let r = self.block_range(b);
                    for i in r.clone() {
                        for j in r.clone() {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            p.set(i, j, delta - x[i] * x[j]);
                        }
                    }
                }
            }
        }
        Ok(p)
    }

    /// Apply `Π_x` to `v` without materializing the matrix. `x` is trusted
    /// to be on the manifold.
    pub fn project_tangent(&self, x: &[f64], v: &mut [f64]) {
        match self.catalog {
            Catalog::Sphere => {
                let c = linalg::dot(v, x);
                linalg::axpy(v, -c, x);
            }
            Catalog::Torus => {
                for b in 0..self.blocks() {
                    let r = self.block_range(b);
                    let c = linalg::dot(&v[r.clone()], &x[r.clone()]);
                    let (lo, hi) = (r.start, r.end);
                    for i in lo..hi {
                        v[i] -= c * x[i];
                    }
                }
            }
        }
    }

    /// Largest normal component of `v` at `x` (0 for exactly tangent `v`).
    pub fn normal_defect(&self, x: &[f64], v: &[f64]) -> f64 {
        match self.catalog {
            Catalog::Sphere => linalg::dot(v, x).abs(),
            Catalog::Torus => (0..self.blocks())
                .map(|b| {
                    let r = self.block_range(b);
                    linalg::dot(&v[r.clone()], &x[r]).abs()
                })
                .fold(0.0_f64, f64::max),
        }
    }

    /// Chord connection rule `γ(x, y) = Π_x(y − x)`.
    pub fn connection_rule(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_on_manifold(x)?;
        self.check_on_manifold(y)?;
        let mut v = linalg::sub(y, x);
        self.project_tangent(x, &mut v);
        Ok(v)
    }

    /// The smooth extension ῑ of the embedding, defined on all of R^d.
    pub fn extension_value(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for j in 0..self.blocks() {
            let r = self.block_range(j);
            self.radial.value(&x[r.clone()], &mut out[r]);
        }
        out
    }

    /// Jacobian `Dῑ` (row i is the ambient gradient of ῑ^i). Restricted to
    /// the manifold this equals the tangent projection.
    pub fn extension_jacobian(&self, x: &[f64]) -> SquareMatrix {
        let d = self.ambient_dim;
        match self.catalog {
            Catalog::Sphere => self.radial.jacobian(x),
            Catalog::Torus => {
                let mut out = SquareMatrix::zeros(d);
                for b in 0..self.blocks() {
                    let r = self.block_range(b);
                    let sub = self.radial.jacobian(&x[r.clone()]);
                    for (li, i) in r.clone().enumerate() {
                        for (lj, j) in r.clone().enumerate() {
                            out.set(i, j, sub.get(li, lj));
                        }
                    }
                }
                out
            }
        }
    }

    /// Hessian of the coordinate ῑ^i.
    pub fn extension_hessian(&self, x: &[f64], i: usize) -> SquareMatrix {
        assert!(i < self.ambient_dim, "coordinate index out of range");
        match self.catalog {
            Catalog::Sphere => self.radial.hessian(x, i),
            Catalog::Torus => {
                let b = i / 2;
                let r = self.block_range(b);
                let sub = self.radial.hessian(&x[r.clone()], i % 2);
                let mut out = SquareMatrix::zeros(self.ambient_dim);
                for (lj, j) in r.clone().enumerate() {
                    for (lk, k) in r.clone().enumerate() {
                        out.set(j, k, sub.get(lj, lk));
                    }
                }
                out
            }
        }
    }

    /// Walk a unit-speed geodesic from `x` in tangent direction `v` for
    /// arc length `theta`.
    pub fn geodesic_step(&self, x: &[f64], v: &[f64], theta: f64) -> Result<Vec<f64>> {
        self.check_on_manifold(x)?;
        let n = linalg::norm(v);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(n));
        }
        let defect = self.normal_defect(x, v);
        if defect > 1e-9 {
            return Err(Error::NotTangent(defect));
        }
        Ok(self.geodesic_step_unchecked(x, v, theta))
    }

    /// Same step without the validity checks, for constructors that build
    /// tangent unit directions themselves.
    pub(crate) fn geodesic_step_unchecked(&self, x: &[f64], v: &[f64], theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        match self.catalog {
            Catalog::Sphere => {
                let (c, s) = (theta.cos(), theta.sin());
                for i in 0..self.ambient_dim {
                    out[i] = c * x[i] + s * v[i];
                }
                linalg::normalize(&mut out, 1e-300);
            }
            Catalog::Torus => {
                for b in 0..self.blocks() {
                    let r = self.block_range(b);
                    let speed = linalg::norm(&v[r.clone()]);
                    let (lo, hi) = (r.start, r.end);
                    if speed < 1e-15 {
                        out[lo..hi].copy_from_slice(&x[lo..hi]);
                        continue;
                    }
                    let ang = speed * theta;
                    let (c, s) = (ang.cos(), ang.sin());
                    for i in lo..hi {
                        out[i] = c * x[i] + s * v[i] / speed;
                    }
                    linalg::normalize(&mut out[lo..hi], 1e-300);
                }
            }
        }
        out
    }

    /// Uniform random point (uniform on spheres, uniform angles on tori).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        use rand_distr::{Distribution, StandardNormal};
        match self.catalog {
            Catalog::Sphere => loop {
                let mut x: Vec<f64> =
                    (0..self.ambient_dim).map(|_| StandardNormal.sample(rng)).collect();
                if linalg::normalize(&mut x, 1e-12) > 1e-12 {
                    return x;
                }
            },
            Catalog::Torus => {
                let mut x = vec![0.0; self.ambient_dim];
                for b in 0..self.blocks() {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    x[2 * b] = a.cos();
                    x[2 * b + 1] = a.sin();
                }
                x
            }
        }
    }

    /// Uniform random unit tangent vector at `x`: a standard normal vector
    /// projected onto `T_xM` and normalized.
    pub fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        use rand_distr::{Distribution, StandardNormal};
        loop {
            let mut g: Vec<f64> =
                (0..self.ambient_dim).map(|_| StandardNormal.sample(rng)).collect();
            self.project_tangent(x, &mut g);
            if linalg::normalize(&mut g, 1e-9) > 1e-9 {
                return g;
            }
        }
    }

    /// Deterministic dense sample of manifold points (used by covers, bound
    /// estimation and coverage tests).
    pub fn dense_sample(&self, n: usize, phase: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        match self.catalog {
            Catalog::Sphere if self.ambient_dim == 2 => {
                for i in 0..n {
                    let a = std::f64::consts::TAU * ((i as f64 + phase) / n as f64);
                    out.push(vec![a.cos(), a.sin()]);
                }
            }
            Catalog::Sphere if self.ambient_dim == 3 => {
                // Fibonacci sphere
                let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
                for i in 0..n {
                    let t = (i as f64 + 0.5 + phase) / n as f64;
                    let z = 1.0 - 2.0 * t;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let a = std::f64::consts::TAU * (i as f64 + phase) / golden;
                    out.push(vec![rho * a.cos(), rho * a.sin(), z]);
                }
            }
            Catalog::Sphere => {
                // Low-discrepancy gaussians via Kronecker sequence + Box–Muller.
                let d = self.ambient_dim;
                let mut kron = Kronecker::new(2 * d.div_ceil(2));
                for _ in 0..n {
                    let u = kron.next_point();
                    let mut x = Vec::with_capacity(d);
                    for pair in 0..d.div_ceil(2) {
                        let u1 = (u[2 * pair] + phase).fract().max(1e-12);
                        let u2 = (u[2 * pair + 1] + phase).fract();
                        let rad = (-2.0 * u1.ln()).sqrt();
                        let ang = std::f64::consts::TAU * u2;
                        x.push(rad * ang.cos());
                        if x.len() < d {
                            x.push(rad * ang.sin());
                        }
                    }
                    if linalg::normalize(&mut x, 1e-12) > 1e-12 {
                        out.push(x);
                    }
                }
            }
            Catalog::Torus => {
                let k = self.blocks();
                let mut kron = Kronecker::new(k);
                for _ in 0..n {
                    let u = kron.next_point();
                    let mut x = vec![0.0; self.ambient_dim];
                    for b in 0..k {
                        let a = std::f64::consts::TAU * (u[b] + phase).fract();
                        x[2 * b] = a.cos();
                        x[2 * b + 1] = a.sin();
                    }
                    out.push(x);
                }
            }
        }
        out
    }
}

/// Conservative sampled bounds on extension derivatives over the closed
/// ambient ball of a given radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivativeBounds {
    /// sup |Dῑ u| over sampled points and unit directions.
    pub a1: f64,
    /// sup over unit u of |Hess ῑ(x)(u, u)| (Euclidean norm over coordinates).
    pub a2: f64,
    /// sup of third partials |∂_i ∂_j ∂_k ῑ^l|.
    pub a3: f64,
    /// Ball radius the bounds cover.
    pub radius: f64,
    /// Set when a supremum was attained inside the blend annulus, where the
    /// cutoff's derivative spike dominates.
    pub blend_flagged: bool,
}

/// Kronecker (additive golden-style) low-discrepancy sequence in [0,1)^d.
struct Kronecker {
    alphas: Vec<f64>,
    i: u64,
}

impl Kronecker {
    fn new(dim: usize) -> Self {
        const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
        let alphas = (0..dim).map(|j| (PRIMES[j % 16] as f64).sqrt().fract()).collect();
        Self { alphas, i: 0 }
    }

    fn next_point(&mut self) -> Vec<f64> {
        self.i += 1;
        self.alphas.iter().map(|a| (self.i as f64 * a).fract()).collect()
    }
}

/// Deterministic direction set: coordinate axes plus low-discrepancy unit
/// vectors.
fn direction_set(dim: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + extra);
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    let mut kron = Kronecker::new(dim);
    while dirs.len() < 2 * dim + extra {
        let u = kron.next_point();
        let mut v: Vec<f64> = u.iter().map(|x| 2.0 * x - 1.0).collect();
        if linalg::normalize(&mut v, 1e-9) > 1e-9 {
            dirs.push(v);
        }
    }
    dirs
}

/// Sampled sup bounds for |Dῑ|, the Hessian quadratic form and third
/// partials over the closed ball B_radius(0), inflated by a 10% safety
/// factor. Sample sets are nested across radii, so the bounds are monotone
/// nondecreasing in the radius.
pub fn derivative_bounds(m: &EmbeddedManifold, radius: f64) -> Result<DerivativeBounds> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParam("radius must be positive".into()));
    }
    let d = m.ambient_dim();
    let b = m.blend_radius();

    // Master point set (independent of the radius), filtered into the ball.
    let mut pts: Vec<Vec<f64>> = Vec::new();
    pts.push(vec![0.0; d]);

    const CUBE_HALF_WIDTH: f64 = 4.0;
    let mut kron = Kronecker::new(d);
    let mut drawn = 0usize;
    while pts.len() < 6_000 && drawn < 300_000 {
        drawn += 1;
        let u = kron.next_point();
        let x: Vec<f64> = u.iter().map(|v| (2.0 * v - 1.0) * CUBE_HALF_WIDTH).collect();
        if linalg::norm(&x) <= radius {
            pts.push(x);
        }
    }

    // Tube stratum: manifold points pushed radially across the blend region,
    // where the extension's derivatives peak.
    let surface = m.dense_sample(400, 0.0);
    let mut offsets: Vec<f64> = (0..=24).map(|k| -b + 2.0 * b * k as f64 / 24.0).collect();
    offsets.extend_from_slice(&[-b, -0.75 * b, -0.5 * b, 0.5 * b, 0.75 * b, b]);
    for p in &surface {
        for &off in &offsets {
            let scale = 1.0 + off;
            if scale <= 0.0 {
                continue;
            }
            for blk in 0..m.blocks() {
                let mut x = p.clone();
                let r = m.block_range(blk);
                for i in r {
                    x[i] *= scale;
                }
                if linalg::norm(&x) <= radius {
                    pts.push(x);
                }
            }
        }
    }

    let dirs = direction_set(d, 40);
    let annulus = |x: &[f64]| {
        let s = m.manifold_distance(x);
        s > 0.5 * b && s < b
    };

    let mut a1 = 0.0_f64;
    let mut a2 = 0.0_f64;
    let mut flagged = false;
    for x in &pts {
        let jac = m.extension_jacobian(x);
        let hess: Vec<SquareMatrix> = (0..d).map(|i| m.extension_hessian(x, i)).collect();
        for u in &dirs {
            let ju = jac.matvec(u);
            let v1 = linalg::norm(&ju);
            if v1 > a1 {
                a1 = v1;
                if annulus(x) {
                    flagged = true;
                }
            }
            let mut q = 0.0;
            for h in &hess {
                let f = h.quad_form(u, u);
                q += f * f;
            }
            let v2 = q.sqrt();
            if v2 > a2 {
                a2 = v2;
                flagged = flagged || annulus(x);
            }
        }
    }

    // Third partials by central differences of the analytic Hessian on a
    // subset of the sample.
    let mut a3 = 0.0_f64;
    let eps = 1e-4;
    let stride = (pts.len() / 1_500).max(1);
    for x in pts.iter().step_by(stride) {
        for k in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += eps;
            xm[k] -= eps;
            for i in 0..d {
                let hp = m.extension_hessian(&xp, i);
                let hm = m.extension_hessian(&xm, i);
                let v3 = hp.sub(&hm).max_abs_entry() / (2.0 * eps);
                if v3 > a3 {
                    a3 = v3;
                    flagged = flagged || annulus(x);
                }
            }
        }
    }

    const SAFETY: f64 = 1.1;
    Ok(DerivativeBounds {
        a1: a1 * SAFETY,
        a2: a2 * SAFETY,
        a3: a3 * SAFETY,
        radius,
        blend_flagged: flagged,
    })
}
