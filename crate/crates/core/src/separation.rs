//! The exponential separation energy `h(w, z) = e^{|z−w|²} − 1` on
//! R^d × R^d and its derivatives.
//!
//! Its Hessian in the 2d variables `(w, z)` has the closed form
//!
//! ```text
//! Hess h = 2 e^{|z−w|²} [  H+I   −(H+I) ]
//!                       [ −(H+I)   H+I  ],     H_ij = 2 (z−w)_i (z−w)_j,
//! ```
//!
//! so the quadratic form against `(u, v)` equals
//! `2 e^{|z−w|²} (2 ⟨z−w, u−v⟩² + |u−v|²) ≥ |u−v|²`. The strict control of
//! `|u−v|²` from below is what turns sup-distance bounds into quadratic
//! variation bounds for pairs of manifold martingales.

use crate::linalg::{self, SquareMatrix};

pub fn value(w: &[f64], z: &[f64]) -> f64 {
    let q = linalg::dist(w, z);
    (q * q).exp() - 1.0
}

/// Gradient in the 2d variables, ordered `(∂/∂w, ∂/∂z)`.
pub fn gradient(w: &[f64], z: &[f64]) -> Vec<f64> {
    let d = w.len();
    let q2: f64 = linalg::dist(w, z).powi(2);
    let e = q2.exp();
    let mut g = vec![0.0; 2 * d];
    for i in 0..d {
        let diff = z[i] - w[i];
        g[i] = -2.0 * diff * e;
        g[d + i] = 2.0 * diff * e;
    }
    g
}

/// Closed-form quadratic form `[uᵀ vᵀ] Hess h(w, z) [u; v]`.
pub fn hessian_form(w: &[f64], z: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let diff = linalg::sub(z, w);
    let uv = linalg::sub(u, v);
    let q2 = linalg::dot(&diff, &diff);
    let inner = linalg::dot(&diff, &uv);
    2.0 * q2.exp() * (2.0 * inner * inner + linalg::dot(&uv, &uv))
}

/// Full `2d × 2d` Hessian matrix, mostly for finite-difference checks.
pub fn hessian(w: &[f64], z: &[f64]) -> SquareMatrix {
    let d = w.len();
    let diff = linalg::sub(z, w);
    let e = linalg::dot(&diff, &diff).exp();
    SquareMatrix::from_fn(2 * d, |a, bb| {
        let (i, wi) = if a < d { (a, true) } else { (a - d, false) };
        let (j, wj) = if bb < d { (bb, true) } else { (bb - d, false) };
        let delta = if i == j { 1.0 } else { 0.0 };
        let block = 2.0 * e * (2.0 * diff[i] * diff[j] + delta);
        if wi == wj {
            block
        } else {
            -block
        }
    })
}
