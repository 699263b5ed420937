//! Weight sequences in log domain.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tail::{bounded_above, ls_slope, tends_to_minus_inf, tends_to_plus_inf, Decision, Policy};
use crate::verdict::{both, GrowthIndexEstimate, IndexWitness, State, Verdict, Window, Witness};

const LC_TOL: f64 = 1e-12;
/// Largest per-doubling slope decay accepted as convergence of the (mg) defect.
const MG_DECAY: f64 = 0.75;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqFlags {
    pub normalized: bool,
    pub log_convex: bool,
}

/// Finite prefix `M_0, …, M_{p_max}` stored as `log M_p`, with cached `log μ_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqFile", into = "SeqFile")]
pub struct WeightSequence {
    log_m: Vec<f64>,
    log_mu: Vec<f64>,
    flags: SeqFlags,
}

#[derive(Serialize, Deserialize)]
struct SeqFile {
    p_max: usize,
    #[serde(rename = "logM")]
    log_m: Vec<f64>,
    #[serde(default)]
    flags: SeqFlags,
}

impl TryFrom<SeqFile> for WeightSequence {
    type Error = Error;

    fn try_from(f: SeqFile) -> Result<Self> {
        if f.log_m.len() != f.p_max + 1 {
            return Err(invalid(format!(
                "p_max = {} but logM has {} entries",
                f.p_max,
                f.log_m.len()
            )));
        }
        WeightSequence::from_log(f.log_m)
    }
}

impl From<WeightSequence> for SeqFile {
    fn from(s: WeightSequence) -> Self {
        SeqFile { p_max: s.p_max(), flags: s.flags, log_m: s.log_m }
    }
}

impl WeightSequence {
    pub fn from_log(log_m: Vec<f64>) -> Result<Self> {
        if log_m.is_empty() {
            return Err(invalid("a weight sequence needs at least M_0"));
        }
        if let Some(p) = log_m.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("logM[{p}] is not finite")));
        }
        let mut log_mu = vec![0.0; log_m.len()];
        for p in 1..log_m.len() {
            log_mu[p] = log_m[p] - log_m[p - 1];
        }
        let flags = compute_flags(&log_m);
        Ok(WeightSequence { log_m, log_mu, flags })
    }

    pub fn from_values(m: &[f64]) -> Result<Self> {
        if m.iter().any(|&v| !(v > 0.0)) {
            return Err(invalid("weight sequences must be positive"));
        }
        WeightSequence::from_log(m.iter().map(|v| v.ln()).collect())
    }

    /// `M_p = 1` for all `p`.
    pub fn constant(p_max: usize) -> Self {
        WeightSequence::from_log(vec![0.0; p_max + 1]).expect("finite")
    }

    pub fn p_max(&self) -> usize {
        self.log_m.len() - 1
    }

    pub fn log_m(&self) -> &[f64] {
        &self.log_m
    }

    pub fn log_mu(&self) -> &[f64] {
        &self.log_mu
    }

    pub fn flags(&self) -> SeqFlags {
        self.flags
    }

    pub fn is_normalized(&self) -> bool {
        self.flags.normalized
    }

    pub fn is_log_convex(&self) -> bool {
        self.flags.log_convex
    }

    pub fn truncate(&self, p_max: usize) -> WeightSequence {
        let n = (p_max + 1).min(self.log_m.len());
        WeightSequence::from_log(self.log_m[..n].to_vec()).expect("finite")
    }

    /// Adds `p·log c` to every entry (multiplies `M_p` by `c^p`).
    pub fn scale_geometric(&self, c: f64) -> WeightSequence {
        let lc = c.ln();
        WeightSequence::from_log(self.log_m.iter().enumerate().map(|(p, v)| v + lc * p as f64).collect())
            .expect("finite")
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_m.iter().map(|v| v.exp()).collect()
    }
}

fn compute_flags(log_m: &[f64]) -> SeqFlags {
    let normalized = log_m[0].abs() <= LC_TOL && log_m.get(1).is_none_or(|&v| v >= -LC_TOL);
    let log_convex = log_m.windows(3).all(|w| 2.0 * w[1] <= w[0] + w[2] + LC_TOL);
    SeqFlags { normalized, log_convex }
}

/// Gevrey sequence `M_p = p!^α`.
pub fn gevrey(alpha: f64, p_max: usize) -> Result<WeightSequence> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("gevrey exponent must be positive, got {alpha}")));
    }
    if p_max < 1 {
        return Err(invalid("gevrey needs p_max >= 1"));
    }
    let mut log_m = Vec::with_capacity(p_max + 1);
    let mut acc = 0.0;
    log_m.push(0.0);
    for k in 1..=p_max {
        acc += (k as f64).ln();
        log_m.push(alpha * acc);
    }
    WeightSequence::from_log(log_m)
}

fn tail_range(p_max: usize) -> std::ops::RangeInclusive<usize> {
    (p_max.div_ceil(2)).max(1)..=p_max
}

fn ln_axis(r: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    r.map(|p| (p as f64).ln()).collect()
}

/// Membership in the class of normalized, log-convex sequences with `M_p^{1/p} → ∞`.
pub fn check_lc(m: &WeightSequence, policy: &Policy) -> Verdict {
    let pm = m.p_max();
    let window = Window::new("p", 0.0, pm as f64);
    let lm = m.log_m();
    if !m.is_normalized() {
        let at = if lm[0].abs() > LC_TOL { 0.0 } else { 1.0 };
        return Verdict::fails(Witness::new("normalization logM", at, lm[at as usize]), window, lm[0].abs())
            .with_note("sequence is not normalized");
    }
    let bad: Vec<f64> = (1..pm)
        .filter(|&p| 2.0 * lm[p] > lm[p - 1] + lm[p + 1] + LC_TOL)
        .map(|p| p as f64)
        .collect();
    if let Some(&last) = bad.last() {
        let p = last as usize;
        let defect = 2.0 * lm[p] - lm[p - 1] - lm[p + 1];
        return Verdict::fails(Witness::new("log-convexity defect", last, defect).with_also(bad), window, defect)
            .with_note("log-convexity violated");
    }
    if pm < 8 {
        return Verdict::inconclusive(window, 0.0).with_note("prefix too short for the divergence test");
    }
    let r = tail_range(pm);
    let x = ln_axis(r.clone());
    let y: Vec<f64> = r.clone().map(|p| lm[p] / p as f64).collect();
    let d = tends_to_plus_inf(&x, &y, policy);
    let tw = Window::new("p", *r.start() as f64, pm as f64);
    let root = (lm[pm] / pm as f64).exp();
    let w = Witness::new("M_p^(1/p)", pm as f64, root);
    Verdict::decided(d.state, w, tw, d.margin)
}

/// Per-order moderate-growth statistic `max_{p+q=n} (logM[n] − logM[p] − logM[q]) / (n+1)`.
pub fn mg_defects(left: &WeightSequence, right: &WeightSequence) -> Vec<f64> {
    let n_max = left.p_max().min(right.p_max());
    let (a, b) = (left.log_m(), right.log_m());
    (0..=n_max)
        .map(|n| {
            let best = (0..=n / 2).map(|p| a[n] - b[p] - b[n - p]).fold(f64::NEG_INFINITY, f64::max);
            best / (n as f64 + 1.0)
        })
        .collect()
}

/// Moderate growth `M_{p+q} ≤ C^{p+q+1} M_p M_q`; the witness value is the estimated `log C`.
pub fn check_mg(m: &WeightSequence, policy: &Policy) -> Verdict {
    mg_verdict(m, m, policy)
}

pub(crate) fn mg_verdict(left: &WeightSequence, right: &WeightSequence, policy: &Policy) -> Verdict {
    let d = mg_defects(left, right);
    let n_max = d.len() - 1;
    if n_max < 8 {
        return Verdict::inconclusive(Window::new("n", 0.0, n_max as f64), 0.0)
            .with_note("prefix too short for the moderate growth test");
    }
    let r = tail_range(n_max);
    let x = ln_axis(r.clone());
    let y: Vec<f64> = r.clone().map(|n| d[n]).collect();
    let mut dec = bounded_above(&x, &y, policy);
    let mut note = None;
    if dec.state == State::Fails {
        if let Some(r) = slope_decay(&x, &y).filter(|&r| r <= MG_DECAY) {
            dec.state = State::Holds;
            note = Some(format!("defect still rising but its slope decays by {r:.3} per doubling of n"));
        }
    }
    let (arg, sup) = d
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let window = Window::new("n", *r.start() as f64, n_max as f64);
    let w = match dec.state {
        State::Fails => Witness::new("mg defect", n_max as f64, d[n_max]),
        _ => Witness::new("log_c", arg as f64, sup.max(0.0)),
    };
    let v = Verdict::decided(dec.state, w, window, dec.margin);
    match note {
        Some(n) => v.with_note(n),
        None => v,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqRelation {
    Preceq,
    Triangle,
    Equiv,
}

impl std::str::FromStr for SeqRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preceq" => Ok(SeqRelation::Preceq),
            "triangle" => Ok(SeqRelation::Triangle),
            "equiv" => Ok(SeqRelation::Equiv),
            _ => Err(invalid(format!("unknown relation: {s}"))),
        }
    }
}

/// Growth relations `M ⪯ N`, `M ◁ N` and `M ≈ N`.
pub fn relation(m: &WeightSequence, n: &WeightSequence, kind: SeqRelation, policy: &Policy) -> Verdict {
    let pm = m.p_max().min(n.p_max());
    let mut v = match kind {
        SeqRelation::Equiv => {
            let a = ratio_verdict(m, n, pm, SeqRelation::Preceq, policy);
            let b = ratio_verdict(n, m, pm, SeqRelation::Preceq, policy);
            both(a, b, Window::new("p", 0.0, pm as f64))
        }
        k => ratio_verdict(m, n, pm, k, policy),
    };
    if m.p_max() != n.p_max() {
        v = v.with_note(format!(
            "sequences truncated to common p_max = {pm} (lengths {} and {})",
            m.p_max(),
            n.p_max()
        ));
    }
    v
}

fn ratio_verdict(
    m: &WeightSequence,
    n: &WeightSequence,
    pm: usize,
    kind: SeqRelation,
    policy: &Policy,
) -> Verdict {
    if pm < 8 {
        return Verdict::inconclusive(Window::new("p", 0.0, pm as f64), 0.0)
            .with_note("prefix too short for a tail decision");
    }
    let (a, b) = (m.log_m(), n.log_m());
    let stat = |p: usize| (a[p] - b[p]) / p as f64;
    let r = tail_range(pm);
    let x = ln_axis(r.clone());
    let y: Vec<f64> = r.clone().map(stat).collect();
    let window = Window::new("p", *r.start() as f64, pm as f64);
    match kind {
        SeqRelation::Triangle => {
            let d = tends_to_minus_inf(&x, &y, policy);
            let w = Witness::new("log ratio root", pm as f64, stat(pm));
            Verdict::decided(d.state, w, window, d.margin)
        }
        _ => {
            let mut d = bounded_above(&x, &y, policy);
            if d.state != State::Holds {
                // Bounded quotient ratios μ_p/ν_p imply a bounded ratio root and converge faster.
                let (ma, mb) = (m.log_mu(), n.log_mu());
                let q: Vec<f64> = r.clone().map(|p| ma[p] - mb[p]).collect();
                let dq = bounded_above(&x, &q, policy);
                if dq.state == State::Holds {
                    d = dq;
                } else if let Some(slope) = block_max_slope(&x, &q) {
                    if slope <= policy.slope_tol {
                        d = Decision { state: State::Holds, trend: dq.trend, margin: policy.slope_tol - slope };
                    }
                }
            }
            let (arg, sup) = (1..=pm)
                .map(|p| (p, stat(p)))
                .fold((1, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            let w = match d.state {
                State::Fails => Witness::new("log ratio root", pm as f64, stat(pm)),
                _ => Witness::new("sup log ratio root", arg as f64, sup),
            };
            Verdict::decided(d.state, w, window, d.margin)
        }
    }
}

/// Least-squares slope of the block maxima of `y` over the last half of 8 equal blocks.
///
/// Staircase rows make quotient ratios oscillate; their block maxima still settle.
fn block_max_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    const BLOCKS: usize = 8;
    let n = x.len().min(y.len());
    if n < 2 * BLOCKS {
        return None;
    }
    let mut bx = Vec::with_capacity(BLOCKS);
    let mut by = Vec::with_capacity(BLOCKS);
    for b in 0..BLOCKS {
        let (lo, hi) = (b * n / BLOCKS, (b + 1) * n / BLOCKS);
        bx.push(x[hi - 1]);
        by.push(y[lo..hi].iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    ls_slope(&bx[BLOCKS / 2..], &by[BLOCKS / 2..])
}

/// Per-doubling decay factor of the slope between the two halves of the window.
///
/// A factor below one means the remaining rise is summable, so the statistic converges.
fn slope_decay(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 8 {
        return None;
    }
    let h = n / 2;
    let s1 = ls_slope(&x[..h], &y[..h])?;
    let s2 = ls_slope(&x[h..n], &y[h..n])?;
    if !(s1 > 0.0 && s2 >= 0.0) {
        return None;
    }
    let c1 = 0.5 * (x[0] + x[h - 1]);
    let c2 = 0.5 * (x[h] + x[n - 1]);
    let doublings = (c2 - c1) / std::f64::consts::LN_2;
    (doublings > 0.0).then(|| (s2 / s1).powf(1.0 / doublings))
}

/// `sup_{p ≥ 1} ((M_p/M_0)/(N_p/N_0))^{1/p}`.
pub fn preceq_constant(m: &WeightSequence, n: &WeightSequence, policy: &Policy) -> Result<f64> {
    let v = relation(m, n, SeqRelation::Preceq, policy);
    if !v.is_holds() {
        return Err(Error::Precondition(format!("M ⪯ N is not established: {}", v.summary())));
    }
    let pm = m.p_max().min(n.p_max());
    let (a, b) = (m.log_m(), n.log_m());
    let sup = (1..=pm)
        .map(|p| (a[p] - a[0] - b[p] + b[0]) / p as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(sup.exp())
}

pub fn pointwise_product(m: &WeightSequence, n: &WeightSequence) -> Result<WeightSequence> {
    combine(m, n, 1.0)
}

pub fn pointwise_quotient(m: &WeightSequence, n: &WeightSequence) -> Result<WeightSequence> {
    combine(m, n, -1.0)
}

fn combine(m: &WeightSequence, n: &WeightSequence, sign: f64) -> Result<WeightSequence> {
    if m.p_max() != n.p_max() {
        return Err(invalid(format!("p_max mismatch: {} vs {}", m.p_max(), n.p_max())));
    }
    WeightSequence::from_log(m.log_m().iter().zip(n.log_m()).map(|(a, b)| a + sign * b).collect())
}

/// Largest log-convex sequence below `M` (lower convex envelope of `p ↦ logM[p]`).
pub fn log_convex_minorant(m: &WeightSequence) -> WeightSequence {
    let y = m.log_m();
    let mut hull: Vec<usize> = Vec::with_capacity(y.len());
    for p in 0..y.len() {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Pop j only when it lies above the chord from i to p by more than roundoff.
            let lhs = (y[j] - y[i]) * (p - i) as f64;
            let rhs = (y[p] - y[i]) * (j - i) as f64;
            let scale = y[i].abs().max(y[j].abs()).max(y[p].abs()).max(1.0);
            if lhs - rhs > 1e-13 * scale * (p - i) as f64 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = y.to_vec();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        for (p, slot) in out.iter_mut().enumerate().take(j).skip(i + 1) {
            let s = (p - i) as f64 / (j - i) as f64;
            *slot = y[i] + s * (y[j] - y[i]);
        }
    }
    WeightSequence::from_log(out).expect("finite")
}

/// Thilliez-type index from the β-condition `liminf μ_{Qp}/μ_p > Q^β`.
pub fn thilliez_gamma(m: &WeightSequence, q_max: usize) -> GrowthIndexEstimate {
    let pm = m.p_max();
    let q_max = q_max.max(2);
    let label = format!("Q in 2..={q_max}, p in [P/2, P] with P = floor({pm}/Q)");
    if pm < 10 * q_max {
        return GrowthIndexEstimate::wide(format!("{label}; p_max below 10*Q_max"));
    }
    let mu = m.log_mu();
    let mut witnesses = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for q in 2..=q_max {
        let big = pm / q;
        let lq = (q as f64).ln();
        let stats: Vec<f64> = (big.div_ceil(2).max(1)..=big).map(|p| (mu[q * p] - mu[p]) / lq).collect();
        let lo = stats.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        witnesses.push(IndexWitness { index: lo, param: q as f64, achieved: (lo * lq).exp() });
        if best.is_none_or(|(b, _)| lo > b) {
            best = Some((lo, hi - lo));
        }
    }
    let (est, osc) = best.expect("at least one Q");
    let pad = 0.01 + osc;
    GrowthIndexEstimate {
        lower: (est - pad).max(0.0),
        upper: (est + pad).max(0.0),
        witnesses,
        window: label,
        flagged: !m.is_log_convex(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let g = gevrey(1.0, 5).unwrap();
        let v = g.values();
        for (a, b) in v.iter().zip([1.0, 1.0, 2.0, 6.0, 24.0, 120.0]) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        let mu: Vec<f64> = g.log_mu().iter().map(|x| x.exp()).collect();
        for (a, b) in mu.iter().zip([1.0, 1.0, 2.0, 3.0, 4.0, 5.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn squared_factorials() {
        let g = gevrey(2.0, 3).unwrap();
        for (a, b) in g.values().iter().zip([1.0, 1.0, 4.0, 36.0]) {
            assert!((a - b).abs() < 1e-9 * b);
        }
    }

    #[test]
    fn bad_gevrey_arguments() {
        assert!(gevrey(0.0, 5).is_err());
        assert!(gevrey(-1.0, 5).is_err());
        assert!(gevrey(1.0, 0).is_err());
    }

    #[test]
    fn minorant_of_convex_is_identity() {
        let g = gevrey(1.5, 50).unwrap();
        assert_eq!(log_convex_minorant(&g).log_m(), g.log_m());
    }
}
