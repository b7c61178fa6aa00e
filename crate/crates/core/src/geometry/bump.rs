//! C^∞ cutoff used to blend the closest-point map into the identity.

/// Smooth transition `H(t)` with `H ≡ 0` for `t ≤ 0` and `H ≡ 1` for
/// `t ≥ 1`, built from `e^{-1/t}`. Returns `(H, H', H'')`.
///
/// Below `t ≈ 1e-3` the exponentials underflow to exactly 0/1 in double
/// precision, so the clamp at `T_EPS` agrees with the float-level function.
fn transition(t: f64) -> (f64, f64, f64) {
    const T_EPS: f64 = 1e-3;
    if t <= T_EPS {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 - T_EPS {
        return (1.0, 0.0, 0.0);
    }
    let w = 1.0 - t;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / w).exp();
    let s = a + b;

    let ap = a / (t * t);
    let bp = -b / (w * w);
    let app = a * (1.0 / t.powi(4) - 2.0 / t.powi(3));
    let bpp = b * (1.0 / w.powi(4) - 2.0 / w.powi(3));

    let h = a / s;
    let p = ap * b - a * bp;
    let hp = p / (s * s);
    let pp = app * b - a * bpp;
    let sp = ap + bp;
    let hpp = (pp * s - 2.0 * p * sp) / (s * s * s);
    (h, hp, hpp)
}

/// Cutoff in the distance variable: `χ(s) = 1` on `[0, b/2]`, `χ(s) = 0` on
/// `[b, ∞)`, smooth and monotone in between.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    b: f64,
}

impl Bump {
    pub fn new(blend_radius: f64) -> Self {
        assert!(blend_radius > 0.0, "blend radius must be positive");
        Self { b: blend_radius }
    }

    pub fn blend_radius(&self) -> f64 {
        self.b
    }

    /// `(χ(s), χ'(s), χ''(s))`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        // t = (b - s) / (b/2) maps [b/2, b] onto [1, 0].
        let t = 2.0 - 2.0 * s / self.b;
        let (h, hp, hpp) = transition(t);
        let dt_ds = -2.0 / self.b;
        (h, hp * dt_ds, hpp * dt_ds * dt_ds)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values() {
        let b = Bump::new(0.5);
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(0.25), 1.0);
        assert_eq!(b.value(0.5), 0.0);
        assert_eq!(b.value(2.0), 0.0);
        let mid = b.value(0.375);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = Bump::new(0.5);
        let eps = 1e-6;
        for &s in &[0.27, 0.3, 0.35, 0.4, 0.45, 0.48] {
            let (_, d1, d2) = b.eval(s);
            let fp = b.value(s + eps);
            let fm = b.value(s - eps);
            let f0 = b.value(s);
            let fd1 = (fp - fm) / (2.0 * eps);
            let fd2 = (fp - 2.0 * f0 + fm) / (eps * eps);
            assert!((d1 - fd1).abs() < 1e-4 * (1.0 + d1.abs()), "χ' at {s}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-2 * (1.0 + d2.abs()), "χ'' at {s}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn monotone_decreasing_in_s() {
        let b = Bump::new(0.5);
        let mut last = 1.0;
        for k in 0..=100 {
            let s = 0.25 + 0.25 * k as f64 / 100.0;
            let v = b.value(s);
            assert!(v <= last + 1e-12);
            last = v;
        }
    }
}
