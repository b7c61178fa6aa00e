//! Estimators for the three path-space distances: the u.c.p. metric `r`,
//! a dictionary lower bound for the semimartingale metric `r̂`, and an
//! upper bound for the `H^p` norm through an explicit decomposition.
//!
//! `r(X) = Σ_{k≥1} 2^{−k} E[1 ∧ sup_{t≤k} |X_t|]` is estimated over the
//! grid horizon; terms beyond ⌊T⌋ are reported as the analytic tail bound
//! `2^{−⌊T⌋}` instead of being simulated.
//!
//! `r̂` is a supremum over all predictable integrands bounded by 1; we
//! evaluate a finite adversarial dictionary and report the max as a LOWER
//! bound. The identity integrand reproduces `X − X₀` exactly, so the
//! reported value always dominates the u.c.p. estimate up to Monte Carlo
//! noise; sign strategies recover finite-variation mass.
//!
//! `‖·‖_{H^p}` takes an infimum over decompositions; we evaluate one
//! explicit decomposition and report the result as an UPPER bound, exactly
//! the quantity the main inequality controls.

use crate::calculus::SemimartingaleDecomposition;
use crate::error::{Error, Result};
use crate::linalg;
use crate::paths::CadlagPath;
use crate::seeding::{splitmix64, stream_rng, Stream};
use crate::stats;
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    RUcp,
    RhatLower,
    HpUpper,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricParams {
    pub p: f64,
    pub horizon: f64,
    pub dictionary_size: usize,
}

/// Point estimate with a standard error; the Monte Carlo unit of every
/// experiment table.
#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub kind: MetricKind,
    pub estimate: f64,
    pub standard_error: f64,
    pub sample_count: usize,
    /// Analytic bound for the truncated tail of the defining series (zero
    /// where no truncation happens).
    pub tail_bound: f64,
    pub params: MetricParams,
}

/// Per-path value of the truncated u.c.p. functional
/// `Σ_{k=1}^{⌊T⌋} 2^{−k} (1 ∧ sup_{t≤k} |X_t|)`.
pub fn ucp_functional(path: &CadlagPath) -> f64 {
    let horizon = path.grid().horizon();
    let kmax = horizon.floor() as usize;
    if kmax == 0 {
        return 0.0;
    }
    let sups = path.prefix_sup_norm();
    let mut acc = 0.0;
    for k in 1..=kmax {
        let idx = path.grid().index_at_or_before(k as f64);
        acc += 2.0_f64.powi(-(k as i32)) * sups[idx].min(1.0);
    }
    acc
}

fn tail_bound(horizon: f64) -> f64 {
    2.0_f64.powi(-(horizon.floor() as i32))
}

/// Monte Carlo estimate of the u.c.p. metric `r` on an ensemble of
/// (difference) paths.
pub fn ucp_metric(paths: &[CadlagPath]) -> Result<MetricReport> {
    if paths.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let horizon = paths[0].grid().horizon();
    let vals: Vec<f64> = paths.iter().map(ucp_functional).collect();
    let (estimate, standard_error) = stats::mean_and_se(&vals);
    Ok(MetricReport {
        kind: MetricKind::RUcp,
        estimate,
        standard_error,
        sample_count: paths.len(),
        tail_bound: tail_bound(horizon),
        params: MetricParams { p: 1.0, horizon, dictionary_size: 0 },
    })
}

/// Predictable integrands bounded by 1, evaluated pathwise.
#[derive(Clone, Debug)]
pub enum Integrand {
    /// H ≡ 1: reproduces X − X₀.
    One,
    /// Per-coordinate sign of the previous increment (the adversarial
    /// strategy that accumulates finite-variation mass).
    SignLast,
    /// Indicator of the first half of the horizon.
    WindowFirstHalf,
    /// I.i.d. ±1 predictable coin flips (seeded, independent of the paths).
    CoinFlips { seed: u64 },
    /// Coordinate selector e_i.
    Coordinate(usize),
}

impl Integrand {
    pub fn label(&self) -> String {
        match self {
            Integrand::One => "one".into(),
            Integrand::SignLast => "sign_last".into(),
            Integrand::WindowFirstHalf => "first_half".into(),
            Integrand::CoinFlips { .. } => "coin_flips".into(),
            Integrand::Coordinate(i) => format!("coord_{i}"),
        }
    }

    /// The u.c.p. functional of `∫ H dX` for this integrand (prefix sups of
    /// the integral at the integer checkpoints, capped and 2^{−k}-weighted).
    pub fn ucp_of_integral(&self, path: &CadlagPath, path_index: usize) -> f64 {
        let grid = path.grid();
        let horizon = grid.horizon();
        let kmax = horizon.floor() as usize;
        if kmax == 0 {
            return 0.0;
        }
        let d = path.dim();
        let checkpoints: Vec<usize> =
            (1..=kmax).map(|k| grid.index_at_or_before(k as f64)).collect();

        let mut coins = match self {
            Integrand::CoinFlips { seed } => {
                Some(stream_rng(splitmix64(*seed ^ path_index as u64), Stream::Coins))
            }
            _ => None,
        };
        let half = horizon / 2.0;

        let mut y = vec![0.0_f64; d.max(1)];
        let mut last_inc = vec![0.0_f64; d];
        let mut buf = vec![0.0_f64; d];
        let mut sup = 0.0_f64;
        let mut acc = 0.0;
        let mut next_cp = 0usize;
        for k in 1..path.len() {
            path.increment_into(k, &mut buf);
            match self {
                Integrand::One => {
                    for i in 0..d {
                        y[i] += buf[i];
                    }
                }
                Integrand::SignLast => {
                    let mut z = 0.0;
                    for i in 0..d {
                        z += if last_inc[i] >= 0.0 { buf[i] } else { -buf[i] };
                        last_inc[i] = buf[i];
                    }
                    y[0] += z;
                }
                Integrand::WindowFirstHalf => {
                    if grid.times()[k - 1] <= half {
                        for i in 0..d {
                            y[i] += buf[i];
                        }
                    }
                }
                Integrand::CoinFlips { .. } => {
                    let c: bool = coins.as_mut().unwrap().random();
                    let s = if c { 1.0 } else { -1.0 };
                    for i in 0..d {
                        y[i] += s * buf[i];
                    }
                }
                Integrand::Coordinate(i) => {
                    y[0] += buf[*i];
                }
            }
            let norm = match self {
                Integrand::SignLast | Integrand::Coordinate(_) => y[0].abs(),
                _ => linalg::norm(&y),
            };
            sup = sup.max(norm);
            while next_cp < checkpoints.len() && checkpoints[next_cp] == k {
                let kk = next_cp + 1;
                acc += 2.0_f64.powi(-(kk as i32)) * sup.min(1.0);
                next_cp += 1;
            }
        }
        acc
    }
}

/// The default adversarial dictionary.
pub fn default_dictionary(dim: usize) -> Vec<Integrand> {
    let mut dict = vec![
        Integrand::One,
        Integrand::SignLast,
        Integrand::WindowFirstHalf,
        Integrand::CoinFlips { seed: 0xC0F1 },
    ];
    for i in 0..dim {
        dict.push(Integrand::Coordinate(i));
    }
    dict
}

/// Dictionary lower bound for the semimartingale metric `r̂`: the max over
/// the dictionary of the u.c.p. metric of the strategy integrals.
pub fn rhat_lower(paths: &[CadlagPath], dictionary: &[Integrand]) -> Result<MetricReport> {
    if paths.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if dictionary.is_empty() {
        return Err(Error::InvalidParam("empty integrand dictionary".into()));
    }
    let horizon = paths[0].grid().horizon();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for h in dictionary {
        let vals: Vec<f64> = paths
            .iter()
            .enumerate()
            .map(|(pi, p)| h.ucp_of_integral(p, pi))
            .collect();
        let (mean, se) = stats::mean_and_se(&vals);
        if mean > best.0 {
            best = (mean, se);
        }
    }
    Ok(MetricReport {
        kind: MetricKind::RhatLower,
        estimate: best.0,
        standard_error: best.1,
        sample_count: paths.len(),
        tail_bound: tail_bound(horizon),
        params: MetricParams { p: 1.0, horizon, dictionary_size: dictionary.len() },
    })
}

/// One ensemble member for the `H^p` estimator: the path and a per-coordinate
/// decomposition of it.
pub struct HpSample<'a> {
    pub path: &'a CadlagPath,
    pub coords: &'a [SemimartingaleDecomposition],
}

/// Upper bound for `‖X‖_{H^p}` through the supplied decomposition:
/// `(Σ_i E[|X^i_0|^p + [M_i]_T^{p/2} + (∫_0^T |dA_i|)^p])^{1/p}`,
/// coordinates summed inside the expectation before the 1/p root.
pub fn hp_norm_upper(samples: &[HpSample<'_>], p: f64, horizon: f64) -> Result<MetricReport> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParam("p must be ≥ 1".into()));
    }
    let mut per_path = Vec::with_capacity(samples.len());
    for s in samples {
        let d = s.path.dim();
        if s.coords.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.coords.len() });
        }
        let grid = s.path.grid();
        let kend = grid.index_at_or_before(horizon);
        let mut v = 0.0;
        for (i, dec) in s.coords.iter().enumerate() {
            let source = crate::calculus::RealPath::new(
                grid.clone(),
                s.path.coordinate(i),
                s.path.jump_flags().to_vec(),
            )?;
            let resid = dec.reconstruction_residual(&source)?;
            let scale = 1.0 + source.sup_abs_up_to(source.len() - 1);
            if resid > 1e-10 * scale {
                return Err(Error::BadDecomposition(resid));
            }
            let x0 = s.path.value(0)[i].abs();
            let qv = dec.martingale_part.quadratic_variation_up_to(kend);
            let tv = dec.fv_part.total_variation_up_to(kend);
            v += x0.powf(p) + qv.powf(p / 2.0) + tv.powf(p);
        }
        per_path.push(vec![v]);
    }
    let (estimate, standard_error) = stats::jackknife(&per_path, |m| m[0].powf(1.0 / p));
    Ok(MetricReport {
        kind: MetricKind::HpUpper,
        estimate,
        standard_error,
        sample_count: samples.len(),
        tail_bound: 0.0,
        params: MetricParams { p, horizon, dictionary_size: 0 },
    })
}

/// One point of a convergence study: difference paths `Xⁿ − X` plus
/// decompositions of those differences for the `H^p` column.
pub struct SequencePoint {
    /// Sequence label (e.g. the coupling scale εₙ).
    pub label: f64,
    pub diffs: Vec<CadlagPath>,
    pub decomps: Option<Vec<Vec<SemimartingaleDecomposition>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifierRow {
    pub label: f64,
    pub r_ucp: MetricReport,
    pub rhat_lb: MetricReport,
    pub hp_ub: Option<MetricReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceClass {
    /// All metrics exactly zero.
    Converged,
    /// r, r̂ and H^p all decay below tolerance.
    HpEvidence,
    /// r and the r̂ lower bound decay below tolerance.
    SemimartingaleEvidence,
    /// r decays but the r̂ lower bound stays away from zero.
    UcpOnly,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifierReport {
    pub rows: Vec<ClassifierRow>,
    /// Fitted log-log decay rates of (r, r̂_lb, H^p_ub) against the label;
    /// `None` with fewer than 3 sequence points. The H^p rate is absent
    /// when no decompositions were supplied.
    pub rates: Option<(f64, f64, Option<f64>)>,
    pub class: ConvergenceClass,
    pub tolerance: f64,
}

/// Evaluate the metric triple along a sequence of ensembles and classify
/// the convergence mode.
pub fn convergence_classifier(
    points: &[SequencePoint],
    p: f64,
    tolerance: f64,
    dictionary: &[Integrand],
) -> Result<ClassifierReport> {
    if points.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut rows = Vec::with_capacity(points.len());
    for pt in points {
        let r_ucp = ucp_metric(&pt.diffs)?;
        let rhat_lb = rhat_lower(&pt.diffs, dictionary)?;
        let hp_ub = match &pt.decomps {
            Some(decs) => {
                let samples: Vec<HpSample<'_>> = pt
                    .diffs
                    .iter()
                    .zip(decs)
                    .map(|(path, coords)| HpSample { path, coords: coords.as_slice() })
                    .collect();
                Some(hp_norm_upper(&samples, p, pt.diffs[0].grid().horizon())?)
            }
            None => None,
        };
        rows.push(ClassifierRow { label: pt.label, r_ucp, rhat_lb, hp_ub });
    }

    let labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    let rates = if rows.len() >= 3 {
        let rs: Vec<f64> = rows.iter().map(|r| r.r_ucp.estimate).collect();
        let rh: Vec<f64> = rows.iter().map(|r| r.rhat_lb.estimate).collect();
        let hp_slope = if rows.iter().all(|r| r.hp_ub.is_some()) {
            let hp: Vec<f64> =
                rows.iter().map(|r| r.hp_ub.as_ref().unwrap().estimate).collect();
            stats::loglog_slope(&labels, &hp)
        } else {
            None
        };
        match (stats::loglog_slope(&labels, &rs), stats::loglog_slope(&labels, &rh)) {
            (Some(a), Some(b)) => Some((a, b, hp_slope)),
            _ => None,
        }
    } else {
        None
    };

    let last = rows.last().unwrap();
    let all_zero = rows.iter().all(|r| {
        r.r_ucp.estimate == 0.0
            && r.rhat_lb.estimate == 0.0
            && r.hp_ub.as_ref().is_none_or(|m| m.estimate == 0.0)
    });
    let r_small = last.r_ucp.estimate < tolerance + 3.0 * last.r_ucp.standard_error;
    let rhat_small = last.rhat_lb.estimate < tolerance + 3.0 * last.rhat_lb.standard_error;
    let hp_small = last
        .hp_ub
        .as_ref()
        .map(|m| m.estimate < tolerance + 3.0 * m.standard_error);

    let class = if all_zero {
        ConvergenceClass::Converged
    } else if r_small && rhat_small && hp_small == Some(true) {
        ConvergenceClass::HpEvidence
    } else if r_small && rhat_small {
        ConvergenceClass::SemimartingaleEvidence
    } else if r_small {
        ConvergenceClass::UcpOnly
    } else {
        ConvergenceClass::Inconclusive
    };

    Ok(ClassifierReport { rows, rates, class, tolerance })
}
