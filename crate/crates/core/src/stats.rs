//! Sample statistics used by the estimators: means with standard errors,
//! jackknife errors for smooth functions of means, and log-log slope fits.

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Jackknife estimate and standard error for a statistic of the form
/// `f(mean of per-sample component vectors)`.
///
/// `samples[i]` holds the per-path components; `f` maps the componentwise
/// mean to the statistic (e.g. a ratio of means, or a p-th root). Runs in
/// O(n · m) by leave-one-out updates of the running sums.
pub fn jackknife<F: Fn(&[f64]) -> f64>(samples: &[Vec<f64>], f: F) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let m = samples[0].len();
    let mut sums = vec![0.0; m];
    for s in samples {
        debug_assert_eq!(s.len(), m);
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += v;
        }
    }
    let full_mean: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let estimate = f(&full_mean);
    if n == 1 {
        return (estimate, 0.0);
    }

    let mut loo = vec![0.0; m];
    let mut reps = Vec::with_capacity(n);
    for s in samples {
        for j in 0..m {
            loo[j] = (sums[j] - s[j]) / (n as f64 - 1.0);
        }
        reps.push(f(&loo));
    }
    let rep_mean = reps.iter().sum::<f64>() / n as f64;
    let var = reps.iter().map(|r| (r - rep_mean) * (r - rep_mean)).sum::<f64>()
        * (n as f64 - 1.0)
        / n as f64;
    (estimate, var.sqrt())
}

/// Least-squares slope of `ln y` against `ln x`. Points with a non-positive
/// coordinate are dropped; returns `None` with fewer than two usable points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Median of a slice (mean of middle two for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_of_mean_matches_classic_se() {
        let xs = [1.0, 2.0, 3.0, 4.0, 10.0];
        let samples: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let (est, se) = jackknife(&samples, |m| m[0]);
        let (mean, classic) = mean_and_se(&xs);
        assert!((est - mean).abs() < 1e-14);
        assert!((se - classic).abs() < 1e-12);
    }

    #[test]
    fn slope_of_quadratic_is_two() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let s = loglog_slope(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
