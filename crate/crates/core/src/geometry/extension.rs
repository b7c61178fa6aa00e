//! Smooth ambient extension of the embedding.
//!
//! For a unit sphere the extension is
//!
//! ```text
//! ῑ(x) = χ(dist(x, M)) · x/|x| + (1 − χ(dist(x, M))) · x,
//! ```
//!
//! where `χ` is a smooth cutoff equal to 1 inside half the blend radius and
//! 0 outside it. On the manifold `ῑ` is the identity and each row of its
//! Jacobian is the tangent projection; every point beyond the blend tube
//! (in particular the trap) is fixed. Flat tori apply the same radial
//! construction factor-by-factor on their 2-dimensional circle blocks, so
//! cross-block derivatives vanish.
//!
//! All derivatives below are closed-form; the pieces are assembled from
//!
//! ```text
//! ῑ(x) = x + χ(s) g(x),   g(x) = x/r − x,   s = |r − 1|,   r = |x|.
//! ```

use super::bump::Bump;
use crate::linalg::SquareMatrix;

/// Value, Jacobian and Hessians of the radial blended extension on a block
/// of dimension `d ≥ 2` (the whole space for spheres, one circle factor for
/// tori).
#[derive(Clone, Debug)]
pub(super) struct RadialExtension {
    pub bump: Bump,
}

impl RadialExtension {
    pub fn new(blend_radius: f64) -> Self {
        Self { bump: Bump::new(blend_radius) }
    }

    /// ῑ on the block.
    pub fn value(&self, x: &[f64], out: &mut [f64]) {
        let r = crate::linalg::norm(x);
        let s = (r - 1.0).abs();
        let chi = self.bump.value(s);
        if chi == 0.0 {
            out.copy_from_slice(x);
            return;
        }
        // chi > 0 keeps us inside the tube, where r ≥ 1 − b > 0.
        for i in 0..x.len() {
            let cp = x[i] / r;
            out[i] = x[i] + chi * (cp - x[i]);
        }
    }

    /// Jacobian `D_j ῑ_i` on the block.
    pub fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        let d = x.len();
        let r = crate::linalg::norm(x);
        let s = (r - 1.0).abs();
        let (chi, dchi, _) = self.bump.eval(s);
        if chi == 0.0 && dchi == 0.0 {
            return SquareMatrix::identity(d);
        }
        let sgn = if r >= 1.0 { 1.0 } else { -1.0 };
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        SquareMatrix::from_fn(d, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let g_i = x[i] * (1.0 - r) / r;
            let dcp_ij = (delta - u[i] * u[j]) / r;
            let dg_ij = dcp_ij - delta;
            delta + dchi * (sgn * u[j]) * g_i + chi * dg_ij
        })
    }

    /// Hessian `∂_k ∂_j ῑ_i` of block coordinate `i`.
    pub fn hessian(&self, x: &[f64], i: usize) -> SquareMatrix {
        let d = x.len();
        let r = crate::linalg::norm(x);
        let s = (r - 1.0).abs();
        let (chi, dchi, d2chi) = self.bump.eval(s);
        if chi == 0.0 && dchi == 0.0 && d2chi == 0.0 {
            return SquareMatrix::zeros(d);
        }
        let sgn = if r >= 1.0 { 1.0 } else { -1.0 };
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        let g_i = x[i] * (1.0 - r) / r;
        let r2 = r * r;
        SquareMatrix::from_fn(d, |j, k| {
            let d_ij = if i == j { 1.0 } else { 0.0 };
            let d_ik = if i == k { 1.0 } else { 0.0 };
            let d_jk = if j == k { 1.0 } else { 0.0 };
            // cp Hessian: ∂_k ∂_j (x_i / r)
            let cp_h = (3.0 * u[i] * u[j] * u[k] - d_ij * u[k] - d_ik * u[j] - d_jk * u[i]) / r2;
            let dg_ij = (d_ij - u[i] * u[j]) / r - d_ij;
            let dg_ik = (d_ik - u[i] * u[k]) / r - d_ik;
            let s_j = sgn * u[j];
            let s_k = sgn * u[k];
            let s_jk = sgn * (d_jk - u[j] * u[k]) / r;
            d2chi * s_k * s_j * g_i
                + dchi * (s_jk * g_i + s_j * dg_ik + s_k * dg_ij)
                + chi * cp_h
        })
    }
}
