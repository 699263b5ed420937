use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrixcalc::assoc_matrix_unchecked;
use crate::seqcore::WeightSequence;
use crate::verdict::{State, Verdict, Window, Witness};
use crate::weightfn::WeightFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub n: usize,
    pub margin: f64,
}

/// Margins of `n^{n(2−α)} ≤ C(4|μ|)^{n+1} log(n)^n` in log domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionTrace {
    pub alpha: f64,
    pub mu_abs: f64,
    pub c: f64,
    pub n_max: usize,
    /// `m(n)` for `n = 2..=n_max`.
    pub margins: Vec<Margin>,
    /// Smallest `n` with `m(k) > 0` for every scanned `k ≥ n`.
    pub crossing: Option<usize>,
    /// `m` is strictly increasing from the crossing to `n_max`.
    pub increasing_after_crossing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ObstructionSchedule>,
}

impl ObstructionTrace {
    pub fn margin_at(&self, n: usize) -> Option<f64> {
        self.margins.iter().find(|m| m.n == n).map(|m| m.margin)
    }

    pub fn with_schedule(mut self, s: ObstructionSchedule) -> Self {
        self.schedule = Some(s);
        self
    }
}

/// `m(n) = n(2−α)log n − log C − (n+1)log(4|μ|) − n·log log n`.
pub fn obstruction_margin(alpha: f64, mu_abs: f64, c: f64, n: usize) -> f64 {
    let x = n as f64;
    let ln = x.ln();
    x * (2.0 - alpha) * ln - c.ln() - (x + 1.0) * (4.0 * mu_abs).ln() - x * ln.ln()
}

pub fn obstruction_demo(alpha: f64, mu_abs: f64, c: f64, n_max: usize) -> Result<ObstructionTrace> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !(mu_abs > 1.0 && mu_abs.is_finite()) {
        return Err(invalid(format!("|mu| must exceed 1, got {mu_abs}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("C must be positive, got {c}")));
    }
    if n_max < 10 {
        return Err(invalid(format!("n_max must be at least 10, got {n_max}")));
    }
    let margins: Vec<Margin> =
        (2..=n_max).map(|n| Margin { n, margin: obstruction_margin(alpha, mu_abs, c, n) }).collect();
    let crossing = match margins.iter().rposition(|m| m.margin <= 0.0) {
        Some(i) if i + 1 < margins.len() => Some(margins[i + 1].n),
        Some(_) => None,
        None => Some(margins[0].n),
    };
    let increasing_after_crossing = crossing.is_some_and(|n0| {
        let tail: Vec<f64> = margins.iter().filter(|m| m.n >= n0).map(|m| m.margin).collect();
        tail.windows(2).all(|w| w[1] > w[0])
    });
    Ok(ObstructionTrace { alpha, mu_abs, c, n_max, margins, crossing, increasing_after_crossing, schedule: None })
}

/// The sequence schedules built from a weight `σ` and a fixed row `T^{(k₀)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionSchedule {
    /// `ℓ_j = j`.
    pub ells: Vec<f64>,
    /// `h_j = max(1, sup_p (T_p / S^{(1/ℓ_j)}_p)^{1/p})`.
    pub h: Vec<f64>,
    /// Strictly increasing with `h_j ≤ log p` for `p ≥ p_j`.
    pub p: Vec<usize>,
    /// `log a_k`, piecewise from the rows `S^{(1/ℓ_j)}`.
    pub log_a: Vec<f64>,
    /// `log C_ℓ` in `b_{n,j} ≤ C_ℓ S^{(ℓ)}_j` for `ℓ = 1/ℓ_j`.
    pub log_c: Vec<f64>,
    /// `T_p ≤ log(p)^p S^{(1/ℓ_j)}_p` for `p ≥ p_j`.
    pub step_two: Verdict,
    /// Boundedness of `(b_n)` against every row.
    pub bounded: Verdict,
}

pub fn obstruction_schedule(
    sigma: &WeightFunction,
    t_row: &WeightSequence,
    j_max: usize,
    p_max: usize,
) -> Result<ObstructionSchedule> {
    if j_max < 1 {
        return Err(invalid("j_max must be at least 1"));
    }
    let mut grid: Vec<f64> = (1..=j_max).map(|j| 1.0 / j as f64).collect();
    grid.reverse();
    let m = assoc_matrix_unchecked(sigma, &grid, p_max)?;
    let row = |j: usize| m.row(1.0 / j as f64).expect("on grid");
    let lt = t_row.log_m();

    let mut ells = Vec::new();
    let mut h = Vec::new();
    let mut p = Vec::new();
    for j in 1..=j_max {
        let s = row(j).log_m();
        let n = (s.len() - 1).min(lt.len() - 1);
        let sup = (1..=n).map(|q| (lt[q] - s[q]) / q as f64).fold(f64::NEG_INFINITY, f64::max);
        let hj = sup.exp().max(1.0);
        let prev = p.last().copied().unwrap_or(1);
        let pj = (hj.exp().ceil() as usize).max(prev + 1).max(2);
        if pj > n {
            break;
        }
        ells.push(j as f64);
        h.push(hj);
        p.push(pj);
    }
    if ells.is_empty() {
        return Err(invalid("no schedule step fits inside the rows; increase p_max"));
    }

    let jn = ells.len();
    let first = row(1).log_m();
    let top = (0..jn).map(|i| row(i + 1).p_max()).min().expect("non-empty");
    let mut log_a = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let seg = p.iter().rposition(|&pj| pj <= k);
        log_a.push(match seg {
            None => first[k],
            Some(i) => row(i + 1).log_m()[k],
        });
    }

    let mut worst_two = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, &pj) in p.iter().enumerate() {
        let s = row(i + 1).log_m();
        let n = (s.len() - 1).min(lt.len() - 1);
        for q in pj..=n {
            let qf = q as f64;
            let d = lt[q] - qf * qf.ln().ln() - s[q];
            if d > worst_two.0 {
                worst_two = (d, q, i + 1);
            }
        }
    }
    let tol = 1e-9;
    let w2 = Window::new("j", 1.0, jn as f64);
    let wit = Witness::new(format!("log T_p - p log log p - log S at j = {}", worst_two.2), worst_two.1 as f64, worst_two.0);
    let state = if worst_two.0 <= tol { State::Holds } else { State::Fails };
    let step_two = Verdict::decided(state, wit, w2, tol - worst_two.0);

    let mut log_c = Vec::with_capacity(jn);
    let mut worst_tail = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 0..jn {
        let s = row(i + 1).log_m();
        let n = log_a.len().min(s.len()) - 1;
        let c = (0..=n).map(|k| log_a[k] - s[k]).fold(f64::NEG_INFINITY, f64::max);
        log_c.push(c.max(0.0));
        for k in p[i]..=n {
            let d = log_a[k] - s[k];
            if d > worst_tail.0 {
                worst_tail = (d, k, i + 1);
            }
        }
    }
    let wb = Window::new("ell", 1.0 / jn as f64, 1.0);
    let wit = Witness::new(format!("log a_k - log S^(1/{})_k beyond p_j", worst_tail.2), worst_tail.1 as f64, worst_tail.0);
    let state = if worst_tail.0 <= tol && log_c.iter().all(|c| c.is_finite()) { State::Holds } else { State::Fails };
    let bounded = Verdict::decided(state, wit, wb, tol - worst_tail.0);

    Ok(ObstructionSchedule { ells, h, p, log_a, log_c, step_two, bounded })
}
