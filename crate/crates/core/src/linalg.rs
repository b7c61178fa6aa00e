//! Minimal dense linear algebra for the low ambient dimensions used here.
//!
//! Ambient points and tangent vectors are plain `&[f64]` slices; projectors
//! and Hessians are small square matrices. Hand-rolled on purpose: every
//! hot loop works on slices, and `d` never exceeds single digits.

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = dot(row, v);
        }
        out
    }

    /// uᵀ A w.
    pub fn quad_form(&self, u: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            acc += u[i] * dot(row, w);
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Row `i` as a slice (the gradient of the i-th component for Jacobians).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// a += c * b
pub fn axpy(a: &mut [f64], c: f64, b: &[f64]) {
    for i in 0..a.len() {
        a[i] += c * b[i];
    }
}

/// Normalize in place; returns the original norm. Leaves `a` untouched if
/// its norm is below `floor`.
pub fn normalize(a: &mut [f64], floor: f64) -> f64 {
    let n = norm(a);
    if n > floor {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_form_matches_matvec() {
        let m = SquareMatrix::from_fn(3, |i, j| (i * 3 + j) as f64);
        let u = [1.0, -2.0, 0.5];
        let w = [0.0, 3.0, 1.0];
        let mv = m.matvec(&w);
        assert!((m.quad_form(&u, &w) - dot(&u, &mv)).abs() < 1e-14);
    }

    #[test]
    fn identity_is_neutral() {
        let id = SquareMatrix::identity(4);
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(id.matvec(&v), v.to_vec());
        assert_eq!(id.trace(), 4.0);
    }
}
