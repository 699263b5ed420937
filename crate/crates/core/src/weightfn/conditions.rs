use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{invalid, Error, Result};
use crate::tail::{bounded_above, log_grid, tail_start, tends_to_minus_inf, tends_to_plus_inf};
use crate::verdict::{both, State, Verdict, Window, Witness};

use super::WeightFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub omega0: Verdict,
    pub omega1: Verdict,
    pub omega3: Verdict,
    pub omega4: Verdict,
    pub omega5: Verdict,
    pub omega6: Verdict,
    pub strong_nq: Verdict,
    /// `L` with `ω(2t) ≤ L(ω(t) + 1)` on the grid.
    pub l: Option<f64>,
    /// `H` with `2ω(t) ≤ ω(Ht) + H` on the grid.
    pub h: Option<f64>,
    /// `C` with `∫_1^∞ ω(yt)/t² dt ≤ C(ω(y) + 1)` on the y-grid.
    pub c: Option<f64>,
}

/// Log grid on `[t_min, min(t_max, horizon/factor)]`, or `None` when that range is too short.
pub(crate) fn scan_grid(w: &WeightFunction, cfg: &RunConfig, factor: f64) -> Option<Vec<f64>> {
    let hi = cfg.t_max.min(w.horizon() / factor);
    if !(hi >= cfg.t_min * 1e3) {
        return None;
    }
    Some(log_grid(cfg.t_min, hi, cfg.t_points))
}

fn no_grid(label: &str) -> Verdict {
    Verdict::inconclusive(Window::new("t", 0.0, 0.0), 0.0)
        .with_note(format!("{label}: validity horizon leaves no usable t-window"))
}

fn window_of(ts: &[f64]) -> Window {
    Window::new("t", ts[0], ts[ts.len() - 1])
}

/// Keeps the tail fraction of the paired samples.
fn tail<'a>(x: &'a [f64], y: &'a [f64], frac: f64) -> (&'a [f64], &'a [f64]) {
    let s = tail_start(x.len(), frac);
    (&x[s..], &y[s..])
}

pub fn check_conditions(w: &WeightFunction, cfg: &RunConfig) -> Result<ConditionReport> {
    let (omega1, l) = omega1(w, cfg)?;
    let (omega6, h) = omega6(w, cfg)?;
    let snq = strong_nq(w, cfg)?;
    let c = if snq.is_holds() { snq.witness.as_ref().map(|x| x.value) } else { None };
    Ok(ConditionReport {
        omega0: omega0(w, cfg)?,
        omega1,
        omega3: omega3(w, cfg)?,
        omega4: omega4(w, cfg)?,
        omega5: omega5(w, cfg)?,
        omega6,
        strong_nq: snq,
        l,
        h,
        c,
    })
}

fn omega0(w: &WeightFunction, cfg: &RunConfig) -> Result<Verdict> {
    let Some(ts) = scan_grid(w, cfg, 1.0) else { return Ok(no_grid("omega0")) };
    let window = window_of(&ts);
    let zero = match w.eval(0.0) {
        Ok(v) => v,
        Err(_) => {
            return Ok(Verdict::fails(Witness::new("omega(0) undefined", 0.0, f64::NAN), window, 0.0))
        }
    };
    if zero.abs() > 1e-12 {
        return Ok(Verdict::fails(Witness::new("omega(0)", 0.0, zero), window, zero.abs()));
    }
    let vals = w.eval_many(&ts)?;
    for i in 1..vals.len() {
        if vals[i] < vals[i - 1] - 1e-12 * vals[i - 1].abs().max(1.0) {
            return Ok(Verdict::fails(
                Witness::new("decrease", ts[i], vals[i] - vals[i - 1]),
                window,
                vals[i - 1] - vals[i],
            ));
        }
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let (tx, ty) = tail(&x, &vals, cfg.policy().fn_tail);
    let d = tends_to_plus_inf(tx, ty, &cfg.policy());
    let n = ts.len() - 1;
    Ok(Verdict::decided(d.state, Witness::new("omega", ts[n], vals[n]), window, d.margin))
}

fn omega1(w: &WeightFunction, cfg: &RunConfig) -> Result<(Verdict, Option<f64>)> {
    let Some(ts) = scan_grid(w, cfg, 2.0) else { return Ok((no_grid("omega1"), None)) };
    let window = window_of(&ts);
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut l = 1.0f64;
    for &t in &ts {
        let a = w.eval(t)?;
        let b = w.eval(2.0 * t)?;
        l = l.max(b / (a + 1.0));
        if a > 0.0 {
            x.push(t.ln());
            y.push((b / a).ln());
        }
    }
    if x.len() < 8 {
        return Ok((no_grid("omega1"), None));
    }
    let (tx, ty) = tail(&x, &y, cfg.policy().fn_tail);
    let d = bounded_above(tx, ty, &cfg.policy());
    let last = y.len() - 1;
    let v = match d.state {
        State::Holds => Verdict::holds(Witness::new("L", x[last].exp(), l), window, d.margin),
        s => Verdict::decided(s, Witness::new("omega(2t)/omega(t)", x[last].exp(), y[last].exp()), window, d.margin),
    };
    let l = if v.is_holds() { Some(l) } else { None };
    Ok((v, l))
}

fn omega3(w: &WeightFunction, cfg: &RunConfig) -> Result<Verdict> {
    let Some(ts) = scan_grid(w, cfg, 1.0) else { return Ok(no_grid("omega3")) };
    let window = window_of(&ts);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &t in &ts {
        let v = w.eval(t)?;
        if t > std::f64::consts::E && v > 0.0 {
            x.push(t.ln());
            y.push((t.ln().ln()) - v.ln());
        }
    }
    if x.len() < 8 {
        return Ok(no_grid("omega3"));
    }
    let (tx, ty) = tail(&x, &y, cfg.policy().fn_tail);
    let d = tends_to_minus_inf(tx, ty, &cfg.policy());
    let last = y.len() - 1;
    Ok(Verdict::decided(d.state, Witness::new("log(t)/omega(t)", x[last].exp(), y[last].exp()), window, d.margin))
}

fn omega4(w: &WeightFunction, cfg: &RunConfig) -> Result<Verdict> {
    let Some(ts) = scan_grid(w, cfg, 1.0) else { return Ok(no_grid("omega4")) };
    let window = window_of(&ts);
    let vals = w.eval_many(&ts)?;
    let mut min_slack = f64::INFINITY;
    let mut at = ts[0];
    for i in 1..vals.len() - 1 {
        let slack = 0.5 * (vals[i - 1] + vals[i + 1]) - vals[i];
        let tol = 1e-9 * vals[i].abs().max(1.0);
        if slack < -tol {
            return Ok(Verdict::fails(Witness::new("midpoint convexity defect", ts[i], -slack), window, -slack));
        }
        if slack < min_slack {
            min_slack = slack;
            at = ts[i];
        }
    }
    Ok(Verdict::holds(Witness::new("min midpoint slack", at, min_slack), window, min_slack.max(0.0))
        .with_note("sampled midpoint convexity of y -> omega(e^y)"))
}

fn omega5(w: &WeightFunction, cfg: &RunConfig) -> Result<Verdict> {
    let Some(ts) = scan_grid(w, cfg, 1.0) else { return Ok(no_grid("omega5")) };
    let window = window_of(&ts);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &t in &ts {
        let v = w.eval(t)?;
        if v > 0.0 {
            x.push(t.ln());
            y.push(v.ln() - t.ln());
        }
    }
    if x.len() < 8 {
        return Ok(no_grid("omega5"));
    }
    let (tx, ty) = tail(&x, &y, cfg.policy().fn_tail);
    let d = tends_to_minus_inf(tx, ty, &cfg.policy());
    let last = y.len() - 1;
    Ok(Verdict::decided(d.state, Witness::new("omega(t)/t", x[last].exp(), y[last].exp()), window, d.margin))
}

const H_GRID: [f64; 9] = [2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0, 4096.0, 65536.0];

fn omega6(w: &WeightFunction, cfg: &RunConfig) -> Result<(Verdict, Option<f64>)> {
    let mut outcomes = Vec::new();
    for &h in &H_GRID {
        let Some(ts) = scan_grid(w, cfg, h) else { continue };
        let window = window_of(&ts);
        let mut d = Vec::with_capacity(ts.len());
        for &t in &ts {
            d.push(2.0 * w.eval(t)? - w.eval(h * t)?);
        }
        let (arg, worst) = d
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let (tx, ty) = tail(&x, &d, cfg.policy().fn_tail);
        let dec = bounded_above(tx, ty, &cfg.policy());
        if worst <= h && dec.state == State::Holds {
            let v = Verdict::holds(Witness::new("H", h, worst), window, h - worst);
            return Ok((v, Some(h)));
        }
        let state = if worst > h || dec.state == State::Fails { State::Fails } else { State::Inconclusive };
        outcomes.push(Verdict::decided(
            state,
            Witness::new(format!("2w(t)-w({h}t)"), ts[arg], worst),
            window,
            (worst - h).abs(),
        ));
    }
    let v = match outcomes.iter().find(|v| v.state == State::Inconclusive) {
        Some(v) => v.clone(),
        None => match outcomes.pop() {
            Some(v) => v,
            None => no_grid("omega6"),
        },
    };
    Ok((v, None))
}

fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Strong nonquasianalyticity `∫_1^∞ ω(yt)/t² dt ≤ C(ω(y) + 1)`, integrated in `u = log t`.
pub fn strong_nq(w: &WeightFunction, cfg: &RunConfig) -> Result<Verdict> {
    const U_MAX: f64 = 80.0;
    let h = w.horizon();
    let lo = cfg.t_min.max(1.0);
    let mut y_hi = cfg.t_max.min(h / 20f64.exp());
    if y_hi < 10.0 * lo {
        y_hi = cfg.t_max.min(h / 10f64.exp());
    }
    if !(y_hi >= 10.0 * lo) {
        return Ok(no_grid("strong_nq"));
    }
    let ys = log_grid(lo, y_hi, 48);
    let window = Window::new("y", lo, y_hi);
    let mut x = Vec::with_capacity(ys.len());
    let mut r = Vec::with_capacity(ys.len());
    for &y in &ys {
        let ly = y.ln();
        let top = if h.is_finite() { (h.ln() - ly).min(U_MAX) } else { U_MAX };
        let g = |u: f64| -> Result<f64> { Ok(w.phi(ly + u)? * (-u).exp()) };
        // Decay rate of the integrand over the last fifth of the range.
        let k = 40;
        let mut us = Vec::with_capacity(k);
        let mut lg = Vec::with_capacity(k);
        for i in 0..k {
            let u = top * (0.8 + 0.2 * i as f64 / (k - 1) as f64);
            let v = g(u)?;
            if v > 0.0 {
                us.push(u);
                lg.push(v.ln());
            }
        }
        let rate = if us.len() >= 2 {
            (lg[lg.len() - 1] - lg[0]) / (us[us.len() - 1] - us[0])
        } else {
            f64::NEG_INFINITY
        };
        if rate >= -1e-3 {
            return Ok(Verdict::fails(Witness::new("integrand decay rate at y", y, rate), window, rate.abs())
                .with_note("truncated integral does not settle"));
        }
        let mut err = None;
        let body = simpson(
            |u| match g(u) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            top,
            1024,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let tail_bound = g(top)? / -rate;
        let integral = body + tail_bound;
        x.push(ly);
        r.push(integral / (w.phi(ly)? + 1.0));
    }
    let (tx, ty) = tail(&x, &r, 0.5);
    let d = bounded_above(tx, ty, &cfg.policy());
    let (arg, c) = r.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let last = r.len() - 1;
    let wit = match d.state {
        State::Fails => Witness::new("integral/(omega+1)", ys[last], r[last]),
        _ => Witness::new("C", ys[arg], c),
    };
    Ok(Verdict::decided(d.state, wit, window, d.margin))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnRelation {
    /// `τ = O(σ)`.
    Preceq,
    /// `τ = o(σ)`.
    OSmall,
    Equiv,
}

impl std::str::FromStr for FnRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preceq" => Ok(FnRelation::Preceq),
            "o_small" | "o-small" => Ok(FnRelation::OSmall),
            "equiv" => Ok(FnRelation::Equiv),
            _ => Err(invalid(format!("unknown relation: {s}"))),
        }
    }
}

/// Growth relations between weight functions, read off the ratio `τ(t)/σ(t)` in the tail.
pub fn fn_relation(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    kind: FnRelation,
    cfg: &RunConfig,
) -> Result<Verdict> {
    match kind {
        FnRelation::Equiv => {
            let a = ratio_verdict(sigma, tau, FnRelation::Preceq, cfg)?;
            let b = ratio_verdict(tau, sigma, FnRelation::Preceq, cfg)?;
            let window = a.window.clone();
            Ok(both(a, b, window))
        }
        k => ratio_verdict(sigma, tau, k, cfg),
    }
}

fn ratio_verdict(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    kind: FnRelation,
    cfg: &RunConfig,
) -> Result<Verdict> {
    let hi = cfg.t_max.min(sigma.horizon()).min(tau.horizon());
    if !(hi >= cfg.t_min * 1e3) {
        return Ok(no_grid("fn_relation"));
    }
    let ts = log_grid(cfg.t_min, hi, cfg.t_points);
    let window = window_of(&ts);
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sigma_positive = false;
    for &t in &ts {
        let (Ok(s), Ok(v)) = (sigma.eval(t), tau.eval(t)) else { continue };
        if s > 0.0 {
            sigma_positive = true;
            if v > 0.0 {
                x.push(t.ln());
                y.push(v.ln() - s.ln());
            }
        }
    }
    if !sigma_positive {
        return Err(invalid("sigma vanishes on the whole window"));
    }
    let s = tail_start(ts.len(), cfg.policy().fn_tail);
    let cut = ts[s].ln();
    let start = x.partition_point(|&v| v < cut);
    if x.len() - start < 8 {
        return Ok(Verdict::inconclusive(window, 0.0).with_note("too few positive samples in the tail"));
    }
    let (tx, ty) = (&x[start..], &y[start..]);
    let last = x.len() - 1;
    let policy = cfg.policy();
    Ok(match kind {
        FnRelation::OSmall => {
            let d = tends_to_minus_inf(tx, ty, &policy);
            Verdict::decided(d.state, Witness::new("tau/sigma", x[last].exp(), y[last].exp()), window, d.margin)
        }
        _ => {
            let d = bounded_above(tx, ty, &policy);
            let (arg, sup) = ty
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let wit = match d.state {
                State::Fails => Witness::new("tau/sigma", x[last].exp(), y[last].exp()),
                _ => Witness::new("sup tau/sigma", tx[arg].exp(), sup.exp()),
            };
            Verdict::decided(d.state, wit, window, d.margin)
        }
    })
}
