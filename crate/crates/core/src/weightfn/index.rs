//! Growth indices `γ(ω)` and `γ̄(ω)` by bisection over the dilation conditions.

use crate::config::RunConfig;
use crate::tail::{bounded_above, log_grid, ls_slope, tail_start};
use crate::verdict::{GrowthIndexEstimate, IndexWitness, State};

use super::WeightFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct IndexOptions {
    pub gamma_max: f64,
    pub resolution: f64,
    /// Half-width added on both sides of the bisection bracket.
    pub pad: f64,
    /// Strictness `η` in `limsup log(ω(K^γ t)/ω(t)) < log K − η`.
    pub eta: f64,
    pub dilations: Vec<f64>,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            gamma_max: 8.0,
            resolution: 0.01,
            pad: 0.05,
            eta: 1e-3,
            dilations: vec![1.25, 1.5, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

enum Probe {
    Holds(IndexWitness),
    Fails,
    Untestable,
}

/// Tail samples of `log(ω(K^γ t)/ω(t))`, shrinking the window until every evaluation succeeds.
fn ratio_tail(w: &WeightFunction, factor: f64, cfg: &RunConfig) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut hi = cfg.t_max.min(w.horizon() / factor);
    for _ in 0..60 {
        if !(hi >= cfg.t_min * 1e3) {
            return None;
        }
        let ts = log_grid(cfg.t_min, hi, cfg.t_points);
        let s = tail_start(ts.len(), cfg.policy().fn_tail);
        let mut x = Vec::with_capacity(ts.len() - s);
        let mut y = Vec::with_capacity(ts.len() - s);
        let mut failed = false;
        for &t in &ts[s..] {
            match (w.eval(t), w.eval(factor * t)) {
                (Ok(a), Ok(b)) => {
                    if a > 0.0 && b > 0.0 {
                        x.push(t.ln());
                        y.push(b.ln() - a.ln());
                    }
                }
                _ => {
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            return if x.len() >= 8 { Some((x, y)) } else { None };
        }
        hi /= 2.0;
    }
    None
}

/// Limit estimates `(low, high)` of a slowly converging statistic: the extremes over the
/// last half of the tail, shifted by the fitted slope over one tail span.
fn limit_band(x: &[f64], y: &[f64]) -> (f64, f64) {
    let span = x[x.len() - 1] - x[0];
    let shift = ls_slope(x, y).unwrap_or(0.0) * span;
    let late = &y[y.len() / 2..];
    let lo = late.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = late.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo + shift, hi + shift)
}

fn probe_upper(w: &WeightFunction, gamma: f64, k: f64, opts: &IndexOptions, cfg: &RunConfig) -> Probe {
    let Some((x, y)) = ratio_tail(w, k.powf(gamma), cfg) else { return Probe::Untestable };
    let (_, sup) = limit_band(&x, &y);
    let d = bounded_above(&x, &y, &cfg.policy());
    if sup < k.ln() - opts.eta && d.state == State::Holds {
        Probe::Holds(IndexWitness { index: gamma, param: k, achieved: sup.exp() })
    } else {
        Probe::Fails
    }
}

fn probe_lower(w: &WeightFunction, gamma: f64, a: f64, opts: &IndexOptions, cfg: &RunConfig) -> Probe {
    let Some((x, y)) = ratio_tail(w, a.powf(gamma), cfg) else { return Probe::Untestable };
    let (inf, _) = limit_band(&x, &y);
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    let d = bounded_above(&x, &neg, &cfg.policy());
    if inf > a.ln() + opts.eta && d.state == State::Holds {
        Probe::Holds(IndexWitness { index: gamma, param: a, achieved: inf.exp() })
    } else {
        Probe::Fails
    }
}

fn scan(
    w: &WeightFunction,
    gamma: f64,
    opts: &IndexOptions,
    cfg: &RunConfig,
    probe: fn(&WeightFunction, f64, f64, &IndexOptions, &RunConfig) -> Probe,
) -> Probe {
    let mut tested = false;
    for &k in &opts.dilations {
        match probe(w, gamma, k, opts, cfg) {
            Probe::Holds(wit) => return Probe::Holds(wit),
            Probe::Fails => tested = true,
            Probe::Untestable => {}
        }
    }
    if tested {
        Probe::Fails
    } else {
        Probe::Untestable
    }
}

/// Largest `γ ≤ gamma_max` whose dilations still fit below the horizon, with the probe there.
fn testable_top(
    w: &WeightFunction,
    opts: &IndexOptions,
    cfg: &RunConfig,
    probe: fn(&WeightFunction, f64, f64, &IndexOptions, &RunConfig) -> Probe,
) -> Option<(f64, Probe)> {
    let mut g = opts.gamma_max;
    while g > opts.resolution {
        match scan(w, g, opts, cfg, probe) {
            Probe::Untestable => g *= 0.9,
            p => return Some((g, p)),
        }
    }
    None
}

fn window_label(cfg: &RunConfig, name: &str) -> String {
    format!(
        "{name}: tail {:.0}% of a {}-point log grid on [{}, min({}, horizon/K^gamma)]",
        cfg.policy().fn_tail * 100.0,
        cfg.t_points,
        cfg.t_min,
        cfg.t_max
    )
}

/// `γ(ω) = sup{γ > 0 : limsup ω(K^γ t)/ω(t) < K for some K > 1}`.
pub fn gamma_index(w: &WeightFunction, cfg: &RunConfig, opts: &IndexOptions) -> GrowthIndexEstimate {
    let label = window_label(cfg, "gamma");
    let mut lo = 0.0;
    let Some((mut hi, first)) = testable_top(w, opts, cfg, probe_upper) else {
        return GrowthIndexEstimate::wide(label);
    };
    let mut witnesses = Vec::new();
    match first {
        Probe::Holds(wit) => {
            return GrowthIndexEstimate {
                lower: hi,
                upper: f64::INFINITY,
                witnesses: vec![wit],
                window: label,
                flagged: true,
            }
        }
        Probe::Untestable => return GrowthIndexEstimate::wide(label),
        Probe::Fails => {}
    }
    let mut flagged = false;
    while hi - lo > opts.resolution {
        let mid = 0.5 * (lo + hi);
        match scan(w, mid, opts, cfg, probe_upper) {
            Probe::Holds(wit) => {
                lo = mid;
                witnesses.push(wit);
            }
            Probe::Fails => hi = mid,
            Probe::Untestable => {
                flagged = true;
                hi = f64::INFINITY;
                break;
            }
        }
    }
    GrowthIndexEstimate {
        lower: (lo - opts.pad).max(0.0),
        upper: hi + opts.pad,
        witnesses,
        window: label,
        flagged,
    }
}

/// `γ̄(ω) = inf{γ > 0 : liminf ω(A^γ t)/ω(t) > A for some A > 1}`.
pub fn gamma_bar_index(w: &WeightFunction, cfg: &RunConfig, opts: &IndexOptions) -> GrowthIndexEstimate {
    let label = window_label(cfg, "gamma_bar");
    let mut lo = 0.0;
    let Some((mut hi, first)) = testable_top(w, opts, cfg, probe_lower) else {
        return GrowthIndexEstimate::wide(label);
    };
    let mut witnesses = Vec::new();
    match first {
        Probe::Holds(wit) => witnesses.push(wit),
        Probe::Fails => {
            return GrowthIndexEstimate {
                lower: hi,
                upper: f64::INFINITY,
                witnesses,
                window: label,
                flagged: true,
            }
        }
        Probe::Untestable => return GrowthIndexEstimate::wide(label),
    }
    let mut flagged = false;
    while hi - lo > opts.resolution {
        let mid = 0.5 * (lo + hi);
        match scan(w, mid, opts, cfg, probe_lower) {
            Probe::Holds(wit) => {
                hi = mid;
                witnesses.push(wit);
            }
            Probe::Fails => lo = mid,
            Probe::Untestable => {
                flagged = true;
                lo = 0.0;
                break;
            }
        }
    }
    GrowthIndexEstimate {
        lower: (lo - opts.pad).max(0.0),
        upper: hi + opts.pad,
        witnesses,
        window: label,
        flagged,
    }
}
