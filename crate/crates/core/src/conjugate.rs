//! Generalized lower and upper Legendre conjugates and the classical envelopes.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::optim::{golden_max, golden_min};
use crate::seqcore::{relation, SeqRelation};
use crate::tail::{bounded_above, log_grid, tail_start};
use crate::verdict::{any_of, all_of, State, Verdict, Window, Witness};
use crate::weightfn::{Kind, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjOptions {
    pub s_points: usize,
    pub golden_steps: usize,
    /// Largest `s` considered when a factor has no finite horizon.
    pub s_cap: f64,
    /// Number of best grid cells refined for the upper conjugate.
    pub refine_cells: usize,
}

impl Default for ConjOptions {
    fn default() -> Self {
        ConjOptions { s_points: 256, golden_steps: 40, s_cap: 1e30, refine_cells: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerPoint {
    pub value: f64,
    pub s_opt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperPoint {
    pub value: f64,
    pub s_opt: f64,
    /// The objective was still rising at the right end of the s-window.
    pub uncertain: bool,
}

fn ln_or_inf(h: f64) -> f64 {
    if h.is_finite() {
        h.ln()
    } else {
        f64::INFINITY
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(3);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Best of the grid optimum and golden-section refinements around the `cells` best grid points.
fn refine<F: Fn(f64) -> f64 + Copy>(us: &[f64], vals: &[f64], f: F, cells: usize, steps: usize, maximize: bool) -> (f64, f64) {
    let n = us.len();
    let key = |i: usize| if maximize { -vals[i] } else { vals[i] };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| key(i).total_cmp(&key(j)).then(i.cmp(&j)));
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best = (us[order[0]], vals[order[0]]);
    for &i in order.iter().take(cells.max(1)) {
        let (a, b) = (us[i.saturating_sub(1)], us[(i + 1).min(n - 1)]);
        let (u, r) = if maximize { golden_max(f, a, b, steps) } else { golden_min(f, a, b, steps) };
        if better(r, best.1) {
            best = (u, r);
        }
    }
    best
}

/// `σ⋆̌τ(e^v) = inf_u σ(e^u) + τ(e^{v−u})`.
pub(crate) fn lower_point_log(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    v: f64,
    opts: &ConjOptions,
) -> Result<LowerPoint> {
    let cap = opts.s_cap.ln();
    let (ls, lt) = (ln_or_inf(sigma.horizon()), ln_or_inf(tau.horizon()));
    let lo = v - lt.min(cap);
    let hi = ls.min(cap);
    let lo_edge_finite = lt < cap;
    let hi_edge_finite = ls < cap;
    if !(lo <= hi) {
        return Err(Error::Domain { t: v.exp(), lo: 0.0, hi: sigma.horizon() * tau.horizon() });
    }
    let f = |u: f64| -> f64 {
        match (sigma.phi(u), tau.phi(v - u)) {
            (Ok(a), Ok(b)) => a + b,
            _ => f64::INFINITY,
        }
    };
    let us = grid(lo, hi, opts.s_points);
    let vals: Vec<f64> = us.iter().map(|&u| f(u)).collect();
    let n = us.len();
    let mut b = 0;
    for i in 1..n {
        if vals[i] < vals[b] {
            b = i;
        }
    }
    if !vals[b].is_finite() {
        return Err(Error::Domain { t: v.exp(), lo: 0.0, hi: sigma.horizon() * tau.horizon() });
    }
    if (b == 0 && lo_edge_finite && vals[0] < vals[1]) || (b == n - 1 && hi_edge_finite && vals[n - 1] < vals[n - 2]) {
        return Err(Error::Horizon(format!(
            "lower conjugate optimum at a factor horizon for t = {}",
            v.exp()
        )));
    }
    let (u, r) = refine(&us, &vals, f, opts.refine_cells, opts.golden_steps, false);
    Ok(LowerPoint { value: r, s_opt: u.exp() })
}

/// `σ⋆̂τ(e^v) = sup_u σ(e^u) − τ(e^{u−v})`, including the `s = 0` candidate.
pub(crate) fn upper_point_log(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    v: f64,
    opts: &ConjOptions,
) -> Result<UpperPoint> {
    let zero = sigma.eval(0.0)? - tau.eval(0.0)?;
    let (ls, lt) = (ln_or_inf(sigma.horizon()), ln_or_inf(tau.horizon()));
    let hi = ls.min(v + lt).min(opts.s_cap.ln());
    let lo = v.min(0.0) - 16.0;
    if !(lo < hi) {
        return Err(Error::Domain { t: v.exp(), lo: 0.0, hi: sigma.horizon() });
    }
    let g = |u: f64| -> f64 {
        match (sigma.phi(u), tau.phi(u - v)) {
            (Ok(a), Ok(b)) => a - b,
            _ => f64::NEG_INFINITY,
        }
    };
    let us = grid(lo, hi, opts.s_points);
    let vals: Vec<f64> = us.iter().map(|&u| g(u)).collect();
    let n = us.len();
    let b = (0..n).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let uncertain = b == n - 1 && vals[n - 1] > vals[n - 2];
    let mut best = LowerPoint { value: zero, s_opt: 0.0 };
    let (u, r) = refine(&us, &vals, g, opts.refine_cells, opts.golden_steps, true);
    if r > best.value {
        best = LowerPoint { value: r, s_opt: u.exp() };
    }
    Ok(UpperPoint { value: best.value, s_opt: best.s_opt, uncertain })
}

/// Lazily evaluated `σ⋆̌τ`.
pub fn lower_fn(sigma: &WeightFunction, tau: &WeightFunction, opts: ConjOptions) -> WeightFunction {
    WeightFunction::lower_node(sigma, tau, opts)
}

/// Lazily evaluated `σ⋆̂τ` (no guard; points with an unresolved sup evaluate to a horizon error).
pub fn upper_fn(sigma: &WeightFunction, tau: &WeightFunction, opts: ConjOptions) -> WeightFunction {
    WeightFunction::upper_node(sigma, tau, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub value: f64,
    pub s_opt: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub horizon_uncertain: bool,
}

#[derive(Clone, Debug)]
pub struct ConjugateResult {
    pub result: WeightFunction,
    pub trace: Vec<TracePoint>,
    pub guard: Option<Verdict>,
    pub horizon_uncertain: bool,
}

#[derive(Serialize)]
struct ConjugateView<'a> {
    kind: Kind,
    #[serde(with = "crate::verdict::ext_f64")]
    horizon: f64,
    guard: &'a Option<Verdict>,
    horizon_uncertain: bool,
    trace: &'a [TracePoint],
}

impl ConjugateResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ConjugateView {
            kind: self.result.kind(),
            horizon: self.result.horizon(),
            guard: &self.guard,
            horizon_uncertain: self.horizon_uncertain,
            trace: &self.trace,
        })
        .expect("serializable")
    }
}

/// Output t-grid for a conjugate: `[t_min, min(t_max, horizon)]` with `n` log-spaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn from_config(cfg: &RunConfig) -> Self {
        GridSpec { t_min: cfg.t_min, t_max: cfg.t_max, n: cfg.t_points }
    }

    fn points(&self, horizon: f64) -> Result<Vec<f64>> {
        let hi = self.t_max.min(horizon);
        if !(hi > self.t_min) {
            return Err(Error::Domain { t: self.t_min, lo: 0.0, hi: horizon });
        }
        Ok(log_grid(self.t_min, hi, self.n))
    }
}

fn isotonic(trace: &mut [TracePoint]) -> Result<()> {
    let mut prev: Option<f64> = None;
    for p in trace.iter_mut().filter(|p| !p.horizon_uncertain) {
        if let Some(q) = prev {
            if p.value < q {
                if q - p.value > 1e-9 * q.abs().max(1.0) {
                    return Err(Error::Internal(format!(
                        "conjugate decreases by {} at t = {}",
                        q - p.value,
                        p.t
                    )));
                }
                p.value = q;
            }
        }
        prev = Some(p.value);
    }
    Ok(())
}

/// `σ⋆̌τ(t) = inf_{s>0} σ(s) + τ(t/s)` with a trace on the output grid.
pub fn lower_conj(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    grid: &GridSpec,
    opts: ConjOptions,
) -> Result<ConjugateResult> {
    let result = lower_fn(sigma, tau, opts);
    let mut trace = Vec::with_capacity(grid.n);
    for t in grid.points(result.horizon())? {
        let p = lower_point_log(sigma, tau, t.ln(), &opts)?;
        trace.push(TracePoint { t, value: p.value, s_opt: p.s_opt, horizon_uncertain: false });
    }
    isotonic(&mut trace)?;
    Ok(ConjugateResult { result, trace, guard: None, horizon_uncertain: false })
}

/// `σ⋆̂τ(t) = sup_{s≥0} σ(s) − τ(s/t)`, refused when the well-definedness guard fails.
pub fn upper_conj(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    grid: &GridSpec,
    opts: ConjOptions,
    cfg: &RunConfig,
) -> Result<ConjugateResult> {
    let mut guard = well_defined_guard(sigma, tau, cfg);
    if guard.is_fails() {
        return Err(Error::WellDefinedness(Box::new(guard)));
    }
    let result = upper_fn(sigma, tau, opts);
    let mut trace = Vec::with_capacity(grid.n);
    let mut uncertain = 0usize;
    for t in grid.points(result.horizon())? {
        let p = upper_point_log(sigma, tau, t.ln(), &opts)?;
        uncertain += p.uncertain as usize;
        trace.push(TracePoint { t, value: p.value, s_opt: p.s_opt, horizon_uncertain: p.uncertain });
    }
    isotonic(&mut trace)?;
    if uncertain > 0 && guard.state == State::Holds {
        guard.state = State::Inconclusive;
        guard.notes.push(format!("{uncertain} trace points have an unresolved sup at the s-window edge"));
    }
    Ok(ConjugateResult { result, trace, guard: Some(guard), horizon_uncertain: uncertain > 0 })
}

/// The three independent well-definedness checks for `σ⋆̂τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardProngs {
    /// `N ◁ M`; only defined when `σ = ω_M` and `τ = ω_N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Verdict>,
    /// `∃C ∀H: sup_t σ(Ht) − Cτ(t) < ∞`.
    pub b: Verdict,
    /// `s ↦ σ(s) − τ(s/t)` bounded at probe values of `t`.
    pub c: Verdict,
}

impl GuardProngs {
    pub fn combined(&self) -> Verdict {
        let window = Window::new("prongs", 0.0, 2.0);
        let prongs: Vec<Verdict> = self.a.iter().chain([&self.b, &self.c]).cloned().collect();
        let mut v = any_of(prongs, window);
        v.notes.push(format!("prongs: a = {}, b = {}, c = {}", self.a_state_str(), self.b.state, self.c.state));
        v
    }

    /// States of the applicable prongs, in the order a, b, c.
    pub fn states(&self) -> Vec<State> {
        self.a.iter().chain([&self.b, &self.c]).map(|v| v.state).collect()
    }

    fn a_state_str(&self) -> &'static str {
        self.a.as_ref().map_or("n/a", |v| v.state.as_str())
    }
}

const GUARD_C: [f64; 3] = [1.0, 0.5, 0.25];
const GUARD_H: [f64; 3] = [2.0, 8.0, 32.0];
const GUARD_T: [f64; 3] = [1.5, 2.0, 4.0];

pub fn guard_prongs(sigma: &WeightFunction, tau: &WeightFunction, cfg: &RunConfig) -> GuardProngs {
    GuardProngs { a: prong_a(sigma, tau, cfg), b: prong_b(sigma, tau, cfg), c: prong_c(sigma, tau, cfg) }
}

/// Any prong holding certifies well-definedness.
pub fn well_defined_guard(sigma: &WeightFunction, tau: &WeightFunction, cfg: &RunConfig) -> Verdict {
    guard_prongs(sigma, tau, cfg).combined()
}

fn prong_a(sigma: &WeightFunction, tau: &WeightFunction, cfg: &RunConfig) -> Option<Verdict> {
    let (m, n) = (sigma.assoc_sequence()?, tau.assoc_sequence()?);
    Some(relation(n, m, SeqRelation::Triangle, &cfg.policy()))
}

fn prong_b(sigma: &WeightFunction, tau: &WeightFunction, cfg: &RunConfig) -> Verdict {
    let policy = cfg.policy();
    let mut per_c = Vec::new();
    for &c in &GUARD_C {
        let mut per_h = Vec::new();
        for &h in &GUARD_H {
            let hi = cfg.t_max.min(sigma.horizon() / h).min(tau.horizon());
            if !(hi >= cfg.t_min * 1e3) {
                per_h.push(Verdict::inconclusive(Window::new("t", cfg.t_min, hi), 0.0));
                continue;
            }
            let ts = log_grid(cfg.t_min, hi, 200);
            let mut x = Vec::new();
            let mut d = Vec::new();
            for &t in &ts {
                if let (Ok(a), Ok(b)) = (sigma.eval(h * t), tau.eval(t)) {
                    x.push(t.ln());
                    d.push(a - c * b);
                }
            }
            let window = Window::new("t", cfg.t_min, hi);
            if x.len() < 16 {
                per_h.push(Verdict::inconclusive(window, 0.0));
                continue;
            }
            let s = tail_start(x.len(), policy.fn_tail);
            let dec = bounded_above(&x[s..], &d[s..], &policy);
            let sup = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let wit = match dec.state {
                State::Fails => Witness::new(format!("sigma({h}t)-{c}tau(t)"), hi, d[d.len() - 1]),
                _ => Witness::new(format!("D_H for H={h}"), h, sup),
            };
            per_h.push(Verdict::decided(dec.state, wit, window, dec.margin));
        }
        let mut v = all_of(per_h, Window::new("H", GUARD_H[0], GUARD_H[GUARD_H.len() - 1]));
        if v.is_holds() {
            v.witness = Some(Witness::new("C", c, v.witness.as_ref().map_or(0.0, |w| w.value)));
        }
        per_c.push(v);
    }
    any_of(per_c, Window::new("C", GUARD_C[GUARD_C.len() - 1], GUARD_C[0]))
}

fn prong_c(sigma: &WeightFunction, tau: &WeightFunction, cfg: &RunConfig) -> Verdict {
    let policy = cfg.policy();
    let mut per_t = Vec::new();
    for &t in &GUARD_T {
        let hi = cfg.t_max.min(sigma.horizon()).min(t * tau.horizon());
        let window = Window::new("s", 1.0, hi);
        if !(hi >= 1e3) {
            per_t.push(Verdict::inconclusive(window, 0.0));
            continue;
        }
        let ss = log_grid(1.0, hi, 200);
        let mut x = Vec::new();
        let mut f = Vec::new();
        for &s in &ss {
            if let (Ok(a), Ok(b)) = (sigma.eval(s), tau.eval(s / t)) {
                x.push(s.ln());
                f.push(a - b);
            }
        }
        if x.len() < 16 {
            per_t.push(Verdict::inconclusive(window, 0.0));
            continue;
        }
        let k = tail_start(x.len(), policy.fn_tail);
        let dec = bounded_above(&x[k..], &f[k..], &policy);
        let sup = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let wit = match dec.state {
            State::Fails => Witness::new(format!("sigma(s)-tau(s/{t})"), hi, f[f.len() - 1]),
            _ => Witness::new("D_t", t, sup),
        };
        per_t.push(Verdict::decided(dec.state, wit, window, dec.margin));
    }
    all_of(per_t, Window::new("t", GUARD_T[0], GUARD_T[GUARD_T.len() - 1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub value: f64,
    pub arg: f64,
    /// The optimum sits at the edge of the search window.
    pub at_edge: bool,
}

/// `h_⋆(t) = inf_{u>0} h(u) + t·u`.
pub fn lower_envelope(h: &WeightFunction, t: f64, opts: &ConjOptions) -> Result<EnvelopePoint> {
    let hi = ln_or_inf(h.horizon()).min(opts.s_cap.ln());
    let lo = -opts.s_cap.ln();
    let f = |w: f64| -> f64 {
        match h.phi(w) {
            Ok(a) => a + t * w.exp(),
            Err(_) => f64::INFINITY,
        }
    };
    let ws = grid(lo, hi, opts.s_points);
    let vals: Vec<f64> = ws.iter().map(|&w| f(w)).collect();
    let n = ws.len();
    let mut b = 0;
    for i in 1..n {
        if vals[i] < vals[b] {
            b = i;
        }
    }
    let (w, r) = refine(&ws, &vals, f, opts.refine_cells, opts.golden_steps, false);
    let (mut value, mut arg) = (r, w.exp());
    let at_edge = b == 0 || b == n - 1;
    if b == 0 {
        if let Ok(z) = h.eval(0.0) {
            if z <= value {
                value = z;
                arg = 0.0;
            }
        }
    }
    Ok(EnvelopePoint { value, arg, at_edge })
}

/// `h^⋆(t) = sup_{s≥0} h(s) − t·s`.
pub fn upper_envelope(h: &WeightFunction, t: f64, opts: &ConjOptions) -> Result<EnvelopePoint> {
    let hi = ln_or_inf(h.horizon()).min(opts.s_cap.ln());
    let lo = -opts.s_cap.ln();
    let g = |w: f64| -> f64 {
        match h.phi(w) {
            Ok(a) => a - t * w.exp(),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let ws = grid(lo, hi, opts.s_points);
    let vals: Vec<f64> = ws.iter().map(|&w| g(w)).collect();
    let n = ws.len();
    let mut b = 0;
    for i in 1..n {
        if vals[i] > vals[b] {
            b = i;
        }
    }
    if b == n - 1 && vals[n - 1] > vals[n - 2] {
        return Err(Error::Horizon(format!("upper envelope still rising at the s-window edge for t = {t}")));
    }
    let (w, r) = refine(&ws, &vals, g, opts.refine_cells, opts.golden_steps, true);
    let (mut value, mut arg) = (r, w.exp());
    if let Ok(z) = h.eval(0.0) {
        if z > value {
            value = z;
            arg = 0.0;
        }
    }
    Ok(EnvelopePoint { value, arg, at_edge: b == 0 })
}
