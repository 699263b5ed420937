//! Finite-window decision rules for asymptotic statements.
//!
//! Every "limit as p or t tends to infinity" question is answered from a tail window.
//! The decisive statistic is examined on the last quarter of that window: its
//! least-squares slope against the log of the index variable, the fitted change across
//! the quarter, and the fraction of monotone steps.

use serde::{Deserialize, Serialize};

use crate::verdict::State;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    /// Minimum fitted change for a trend to count as decisive.
    pub margin: f64,
    /// Slope (per unit of log index) below which a statistic counts as flat.
    pub slope_tol: f64,
    /// Fraction of steps that must move in the trend direction.
    pub monotone_frac: f64,
    /// Fraction of a function grid used as the tail window.
    pub fn_tail: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy { margin: 1e-3, slope_tol: 0.02, monotone_frac: 0.75, fn_tail: 0.25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trend {
    pub slope: f64,
    pub delta: f64,
    pub up_frac: f64,
    pub down_frac: f64,
}

/// Trend of `y` against `x` (already in log units) over the last quarter of the slices.
pub fn trend(x: &[f64], y: &[f64]) -> Trend {
    let n = x.len().min(y.len());
    if n < 2 {
        return Trend { slope: 0.0, delta: 0.0, up_frac: 0.0, down_frac: 0.0 };
    }
    let start = n - (n / 4).max(2).min(n);
    let xs = &x[start..n];
    let ys = &y[start..n];
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in xs.iter().zip(ys) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let span = xs[xs.len() - 1] - xs[0];
    let steps = (ys.len() - 1) as f64;
    let up = ys.windows(2).filter(|w| w[1] >= w[0]).count() as f64;
    let down = ys.windows(2).filter(|w| w[1] <= w[0]).count() as f64;
    Trend { slope, delta: slope * span, up_frac: up / steps, down_frac: down / steps }
}

/// Least-squares slope of `ys` against `xs`; `None` when the abscissae coincide.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub state: State,
    pub trend: Trend,
    pub margin: f64,
}

/// Holds when the statistic is eventually bounded above, Fails on a decisive rise.
pub fn bounded_above(x: &[f64], y: &[f64], policy: &Policy) -> Decision {
    let t = trend(x, y);
    let state = if t.slope > policy.slope_tol
        && t.delta > policy.margin
        && t.up_frac >= policy.monotone_frac
    {
        State::Fails
    } else if t.slope <= policy.slope_tol {
        State::Holds
    } else {
        State::Inconclusive
    };
    Decision { state, trend: t, margin: (t.slope - policy.slope_tol).abs() }
}

/// Holds on a decisive fall towards minus infinity, Fails when the statistic levels off.
pub fn tends_to_minus_inf(x: &[f64], y: &[f64], policy: &Policy) -> Decision {
    let t = trend(x, y);
    let state = if t.slope < -policy.slope_tol
        && -t.delta > policy.margin
        && t.down_frac >= policy.monotone_frac
    {
        State::Holds
    } else if t.slope >= -policy.slope_tol {
        State::Fails
    } else {
        State::Inconclusive
    };
    Decision { state, trend: t, margin: (t.slope + policy.slope_tol).abs() }
}

/// Holds on a decisive rise towards plus infinity, Fails when the statistic levels off.
pub fn tends_to_plus_inf(x: &[f64], y: &[f64], policy: &Policy) -> Decision {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    tends_to_minus_inf(x, &neg, policy)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log_grid needs 0 < lo <= hi");
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// First index of the tail made of the last `frac` of `n` points.
pub fn tail_start(n: usize, frac: f64) -> usize {
    let k = ((n as f64) * frac).ceil() as usize;
    n - k.clamp(1, n)
}

/// Relative deviation |a − b| / max(1, |b|).
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
