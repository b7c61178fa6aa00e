//! Geodesic-ball covers built by farthest-point greedy selection.

use super::EmbeddedManifold;
use crate::error::{Error, Result};
use crate::linalg;

/// A cover of the manifold by ambient-distance balls: inner balls `U_j` of
/// radius `inner_radius` around the centers, enlarged balls `V_j` of radius
/// `outer_radius` with `U_j ⋐ V_j`.
#[derive(Clone, Debug)]
pub struct BallCover {
    centers: Vec<Vec<f64>>,
    inner_radius: f64,
    outer_radius: f64,
}

impl BallCover {
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// Index of the first inner ball containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.centers.iter().position(|c| linalg::dist(c, x) <= self.inner_radius)
    }

    pub fn in_inner(&self, j: usize, x: &[f64]) -> bool {
        linalg::dist(&self.centers[j], x) <= self.inner_radius
    }

    pub fn in_outer(&self, j: usize, x: &[f64]) -> bool {
        linalg::dist(&self.centers[j], x) <= self.outer_radius
    }
}

/// Greedy (farthest-point) cover of the manifold by balls of the given
/// ambient radii. Centers are manifold points; the construction is
/// deterministic. The greedy loop terminates at `inner − 2·spacing` of the
/// dense sample, so points between samples are still within `inner` of a
/// center.
pub fn ball_cover(
    m: &EmbeddedManifold,
    inner_radius: f64,
    outer_radius: f64,
) -> Result<BallCover> {
    if !(inner_radius > 0.0 && outer_radius > inner_radius) {
        return Err(Error::InvalidParam(
            "cover radii must satisfy 0 < inner < outer".into(),
        ));
    }
    let n = cover_sample_size(m);
    let effective = inner_radius - 2.0 * sample_spacing_estimate(m, n);
    if effective <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "inner radius {inner_radius} is below the cover sampling resolution"
        )));
    }
    let sample = m.dense_sample(n, 0.0);
    let mut centers: Vec<Vec<f64>> = vec![sample[0].clone()];
    // Distance from each sample to its nearest chosen center.
    let mut dist: Vec<f64> = sample.iter().map(|p| linalg::dist(p, &centers[0])).collect();
    loop {
        let (arg, &worst) = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if worst <= effective {
            break;
        }
        let c = sample[arg].clone();
        for (d, p) in dist.iter_mut().zip(&sample) {
            let nd = linalg::dist(p, &c);
            if nd < *d {
                *d = nd;
            }
        }
        centers.push(c);
    }
    Ok(BallCover { centers, inner_radius, outer_radius })
}

fn cover_sample_size(m: &EmbeddedManifold) -> usize {
    match (m.catalog(), m.intrinsic_dim()) {
        (_, 1) => 4096,
        (super::Catalog::Sphere, 2) => 8192,
        _ => 32768,
    }
}

/// Rough nearest-neighbor spacing of the dense sample: intrinsic volume to
/// the power 1/dim over the sample count.
fn sample_spacing_estimate(m: &EmbeddedManifold, n: usize) -> f64 {
    let dim = m.intrinsic_dim() as f64;
    let volume = match m.catalog() {
        super::Catalog::Sphere => {
            // Surface measure of S^{d-1}: 2 π^{d/2} / Γ(d/2).
            let d = m.ambient_dim() as f64;
            2.0 * std::f64::consts::PI.powf(d / 2.0)
                / statrs::function::gamma::gamma(d / 2.0)
        }
        super::Catalog::Torus => std::f64::consts::TAU.powf(dim),
    };
    (volume / n as f64).powf(1.0 / dim)
}
