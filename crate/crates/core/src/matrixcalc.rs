//! Weight matrices: associated matrices, matrix conditions and relations, products and quotients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{parse_ratio, RunConfig};
use crate::error::{invalid, Error, Result};
use crate::seqcore::{
    check_lc, gevrey, log_convex_minorant, mg_verdict, pointwise_product, pointwise_quotient, relation,
    SeqRelation, WeightSequence,
};
use crate::tail::{bounded_above, log_grid, tail_start, Policy};
use crate::verdict::{all_of, any_of, State, Verdict, Window, Witness};
use crate::weightfn::{check_conditions, phi_star, Kind, WeightFunction};

/// Absolute log tolerance for the exact identities (sharp moderate growth, quotient sequences).
pub const IDENTITY_TOL: f64 = 1e-9;
/// Log tolerance for the point-wise order of rows.
pub const ORDER_TOL: f64 = 1e-10;

const L_FACTORS: [f64; 3] = [2.0, 4.0, 8.0];
const D_MAX: usize = 64;

/// How a matrix was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Associated { weight: Kind },
    Product { left: Box<Provenance>, right: Box<Provenance> },
    Quotient { num: Box<Provenance>, den: Box<Provenance> },
    GevreyQuotient { inner: Box<Provenance>, alpha: f64 },
    Constant,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Roumieu,
    Beurling,
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roumieu" => Ok(Flavor::Roumieu),
            "beurling" => Ok(Flavor::Beurling),
            _ => Err(invalid(format!("unknown flavor: {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixRelation {
    /// `∀α ∃β: M^{(α)} ⪯ N^{(β)}`.
    RoumieuPreceq,
    /// `∀β ∃α: M^{(α)} ⪯ N^{(β)}`.
    BeurlingPreceq,
    /// `∀α, β: M^{(α)} ◁ N^{(β)}`.
    Triangle,
    /// `∃k ∀ℓ: M^{(k)} ⪯ N^{(ℓ)}`.
    Mixed,
}

impl std::str::FromStr for MatrixRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roumieu" | "roumieu_preceq" => Ok(MatrixRelation::RoumieuPreceq),
            "beurling" | "beurling_preceq" => Ok(MatrixRelation::BeurlingPreceq),
            "triangle" => Ok(MatrixRelation::Triangle),
            "mixed" => Ok(MatrixRelation::Mixed),
            _ => Err(invalid(format!("unknown matrix relation: {s}"))),
        }
    }
}

/// A finite family `{M^{(ℓ)} : ℓ ∈ ells}` of weight sequences.
///
/// Rows of associated matrices may be shorter than `p_max` when `φ*_ω(ℓp)` leaves the
/// validity horizon; checks quantify only over indices where every touched row is defined.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    ells: Vec<f64>,
    rows: Vec<WeightSequence>,
    p_max: usize,
    provenance: Provenance,
    regularized: Option<Vec<WeightSequence>>,
    degenerate: bool,
    row_lc: Vec<State>,
    weight: Option<WeightFunction>,
}

fn same_ell(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn grid_note(ells: &[f64]) -> String {
    let list: Vec<String> = ells.iter().map(|l| l.to_string()).collect();
    format!("quantifiers over ell read on the grid {{{}}}", list.join(", "))
}

fn ell_window(ells: &[f64]) -> Window {
    Window::new("ell", ells[0], ells[ells.len() - 1])
}

impl WeightMatrix {
    /// Rows given explicitly; `ells` must be positive and strictly increasing.
    pub fn from_rows(ells: Vec<f64>, rows: Vec<WeightSequence>) -> Result<Self> {
        Self::assemble(ells, rows, Provenance::Raw)
    }

    /// The same sequence at every grid point.
    pub fn constant(seq: &WeightSequence, ells: Vec<f64>) -> Result<Self> {
        let rows = vec![seq.clone(); ells.len()];
        Self::assemble(ells, rows, Provenance::Constant)
    }

    fn assemble(ells: Vec<f64>, rows: Vec<WeightSequence>, provenance: Provenance) -> Result<Self> {
        if ells.is_empty() {
            return Err(invalid("a weight matrix needs at least one row"));
        }
        if ells.len() != rows.len() {
            return Err(invalid(format!("{} parameters but {} rows", ells.len(), rows.len())));
        }
        if ells.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("matrix parameters must be positive"));
        }
        if ells.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("matrix parameters must be strictly increasing"));
        }
        let p_max = rows.iter().map(|r| r.p_max()).max().expect("non-empty");
        let policy = Policy::default();
        let row_lc = rows.iter().map(|r| check_lc(r, &policy).state).collect();
        Ok(WeightMatrix {
            ells,
            rows,
            p_max,
            provenance,
            regularized: None,
            degenerate: false,
            row_lc,
            weight: None,
        })
    }

    pub fn ells(&self) -> &[f64] {
        &self.ells
    }

    pub fn rows(&self) -> &[WeightSequence] {
        &self.rows
    }

    /// Nominal prefix length requested at construction.
    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// Largest `p` defined in every row.
    pub fn effective_p_max(&self) -> usize {
        self.rows.iter().map(|r| r.p_max()).min().expect("non-empty")
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Log-convex regularized rows of a quotient matrix.
    pub fn regularized(&self) -> Option<&[WeightSequence]> {
        self.regularized.as_deref()
    }

    /// The regularized matrix as a matrix in its own right.
    pub fn regularized_matrix(&self) -> Option<WeightMatrix> {
        let rows = self.regularized.clone()?;
        Self::assemble(self.ells.clone(), rows, self.provenance.clone()).ok()
    }

    /// Set for quotients whose denominator does not grow strictly slower than the numerator.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Per-row state of the log-convex class check.
    pub fn row_lc(&self) -> &[State] {
        &self.row_lc
    }

    /// The generating weight of an associated matrix.
    pub fn weight(&self) -> Option<&WeightFunction> {
        self.weight.as_ref()
    }

    pub fn index_of(&self, ell: f64) -> Option<usize> {
        self.ells.iter().position(|&l| same_ell(l, ell))
    }

    pub fn row(&self, ell: f64) -> Option<&WeightSequence> {
        self.index_of(ell).map(|i| &self.rows[i])
    }

    /// Replaces one row (used for perturbation controls).
    pub fn with_row(&self, ell: f64, seq: WeightSequence) -> Result<WeightMatrix> {
        let i = self.index_of(ell).ok_or_else(|| invalid(format!("ell = {ell} is not on the grid")))?;
        let mut out = self.clone();
        out.row_lc[i] = check_lc(&seq, &Policy::default()).state;
        out.rows[i] = seq;
        Ok(out)
    }

    /// Point-wise order `ℓ₁ ≤ ℓ₂ ⇒ M^{(ℓ₁)} ≤ M^{(ℓ₂)}`, plus quotient order for associated matrices.
    pub fn check_order(&self) -> Verdict {
        let window = ell_window(&self.ells);
        let mut worst: Option<(f64, usize, f64)> = None;
        let mut worst_mu: Option<(f64, usize, f64)> = None;
        let assoc = matches!(self.provenance, Provenance::Associated { .. });
        for (i, pair) in self.rows.windows(2).enumerate() {
            let n = pair[0].p_max().min(pair[1].p_max());
            let (a, b) = (pair[0].log_m(), pair[1].log_m());
            for p in 0..=n {
                let d = (a[p] - b[p]) / a[p].abs().max(1.0);
                if worst.is_none_or(|w| d > w.0) {
                    worst = Some((d, p, self.ells[i]));
                }
            }
            if assoc {
                let (a, b) = (pair[0].log_mu(), pair[1].log_mu());
                for p in 1..=n {
                    let d = (a[p] - b[p]) / a[p].abs().max(1.0);
                    if worst_mu.is_none_or(|w| d > w.0) {
                        worst_mu = Some((d, p, self.ells[i]));
                    }
                }
            }
        }
        let Some((d, p, ell)) = worst else {
            return Verdict::holds(Witness::new("single row", 0.0, 0.0), window, 0.0);
        };
        if d > ORDER_TOL {
            return Verdict::fails(Witness::new(format!("row order at ell = {ell}"), p as f64, d), window, d);
        }
        if let Some((dm, pm, em)) = worst_mu {
            if dm > IDENTITY_TOL {
                return Verdict::fails(Witness::new(format!("quotient order at ell = {em}"), pm as f64, dm), window, dm);
            }
        }
        Verdict::holds(Witness::new("max order defect", p as f64, d), window, ORDER_TOL - d)
    }

    pub fn to_json(&self) -> Value {
        let rows_obj = |rows: &[WeightSequence]| -> Value {
            let mut m = serde_json::Map::new();
            for (l, r) in self.ells.iter().zip(rows) {
                m.insert(l.to_string(), json!(r.log_m()));
            }
            Value::Object(m)
        };
        let mut v = json!({
            "ells": self.ells,
            "p_max": self.p_max,
            "rows": rows_obj(&self.rows),
            "provenance": self.provenance,
        });
        if let Some(reg) = &self.regularized {
            v["regularized"] = rows_obj(reg);
        }
        if self.degenerate {
            v["degenerate"] = json!(true);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| invalid(format!("matrix file: {m}"));
        let ells: Vec<f64> = serde_json::from_value(v.get("ells").cloned().ok_or_else(|| bad("missing ells"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let p_max = v.get("p_max").and_then(Value::as_u64).ok_or_else(|| bad("missing p_max"))? as usize;
        let read_rows = |obj: &Value| -> Result<Vec<WeightSequence>> {
            let obj = obj.as_object().ok_or_else(|| bad("rows must be an object"))?;
            let mut keyed = BTreeMap::new();
            for (k, row) in obj {
                let ell = k.parse::<f64>().or_else(|_| parse_ratio(k))?;
                let i = ells
                    .iter()
                    .position(|&l| same_ell(l, ell))
                    .ok_or_else(|| bad(&format!("row key {k} is not in ells")))?;
                let log_m: Vec<f64> = serde_json::from_value(row.clone()).map_err(|e| bad(&e.to_string()))?;
                if log_m.len() > p_max + 1 {
                    return Err(bad(&format!("row {k} is longer than p_max + 1")));
                }
                keyed.insert(i, WeightSequence::from_log(log_m)?);
            }
            if keyed.len() != ells.len() {
                return Err(bad("every ell needs a row"));
            }
            Ok(keyed.into_values().collect())
        };
        let rows = read_rows(v.get("rows").ok_or_else(|| bad("missing rows"))?)?;
        let provenance = match v.get("provenance") {
            Some(p) if !p.is_null() => serde_json::from_value(p.clone()).map_err(|e| bad(&e.to_string()))?,
            _ => Provenance::Raw,
        };
        let mut m = Self::assemble(ells.clone(), rows, provenance)?;
        m.p_max = p_max;
        if let Some(r) = v.get("regularized") {
            m.regularized = Some(read_rows(r)?);
        }
        m.degenerate = v.get("degenerate").and_then(Value::as_bool).unwrap_or(false);
        if let Provenance::Associated { weight } = &m.provenance {
            m.weight = WeightFunction::from_kind(weight).ok();
        }
        Ok(m)
    }
}

/// `W^{(ℓ)}_p = exp(φ*_ω(ℓp)/ℓ)` for every `ℓ` on the grid.
pub fn assoc_matrix(w: &WeightFunction, ells: &[f64], p_max: usize) -> Result<WeightMatrix> {
    let cfg = RunConfig::default();
    let report = check_conditions(w, &cfg)?;
    for (name, v) in [("omega0", &report.omega0), ("omega3", &report.omega3)] {
        if v.is_fails() {
            return Err(Error::Precondition(format!("{name} fails for the weight: {}", v.summary())));
        }
    }
    assoc_matrix_unchecked(w, ells, p_max)
}

/// [`assoc_matrix`] without the condition precheck.
pub fn assoc_matrix_unchecked(w: &WeightFunction, ells: &[f64], p_max: usize) -> Result<WeightMatrix> {
    let mut rows = Vec::with_capacity(ells.len());
    for &ell in ells {
        let mut log_w = Vec::with_capacity(p_max + 1);
        for p in 0..=p_max {
            match phi_star(w, ell * p as f64) {
                Ok(v) => log_w.push(v / ell),
                Err(Error::Horizon(_)) | Err(Error::Domain { .. }) if p > 0 => break,
                Err(e) => return Err(e),
            }
        }
        rows.push(WeightSequence::from_log(log_w)?);
    }
    let mut m = WeightMatrix::assemble(ells.to_vec(), rows, Provenance::Associated { weight: w.kind() })?;
    m.p_max = p_max;
    m.weight = Some(w.clone());
    Ok(m)
}

/// Largest `log W^{(ℓ)}_{p+q} − log W^{(2ℓ)}_p − log W^{(2ℓ)}_q` over `p + q ≤ n_max`.
///
/// Returns `(defect, p, q)`.
pub fn sharp_mg_defect(row: &WeightSequence, doubled: &WeightSequence, n_max: usize) -> (f64, usize, usize) {
    let n_max = n_max.min(row.p_max()).min(doubled.p_max());
    let (a, b) = (row.log_m(), doubled.log_m());
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for n in 0..=n_max {
        for p in 0..=n / 2 {
            let d = a[n] - b[p] - b[n - p];
            if d > best.0 {
                best = (d, p, n - p);
            }
        }
    }
    best
}

/// `W^{(ℓ)}_{p+q} ≤ W^{(2ℓ)}_p W^{(2ℓ)}_q` for every `ℓ` whose double is on the grid.
pub fn sharp_mg(m: &WeightMatrix, n_max: usize) -> Verdict {
    let mut items = Vec::new();
    for (i, &ell) in m.ells.iter().enumerate() {
        let Some(j) = m.index_of(2.0 * ell) else { continue };
        let (d, p, q) = sharp_mg_defect(&m.rows[i], &m.rows[j], n_max);
        let n = n_max.min(m.rows[i].p_max()).min(m.rows[j].p_max());
        let window = Window::new("p+q", 0.0, n as f64);
        let wit = Witness::new(format!("log defect at ell = {ell}, q = {q}"), p as f64, d);
        let state = if d <= IDENTITY_TOL { State::Holds } else { State::Fails };
        items.push(Verdict::decided(state, wit, window, IDENTITY_TOL - d));
    }
    let v = all_of(items, ell_window(&m.ells)).with_note(grid_note(&m.ells));
    if v.witness.as_ref().is_some_and(|w| w.label == "vacuous") {
        return v.with_note("no ell with 2 ell on the grid");
    }
    v
}

/// Grid points that get a partner search: those from which the grid extends by `factor`
/// in the partner direction, plus the point with the widest reach.
fn tested_ells(m: &WeightMatrix, flavor: Flavor, factor: f64) -> Vec<usize> {
    let (lo, hi) = (m.ells[0], m.ells[m.ells.len() - 1]);
    let mut out: Vec<usize> = (0..m.ells.len())
        .filter(|&i| match flavor {
            Flavor::Roumieu => m.ells[i] * factor <= hi * (1.0 + 1e-12),
            Flavor::Beurling => m.ells[i] / factor >= lo * (1.0 - 1e-12),
        })
        .collect();
    let reach = match flavor {
        Flavor::Roumieu => 0,
        Flavor::Beurling => m.ells.len() - 1,
    };
    if !out.contains(&reach) {
        out.push(reach);
        out.sort_unstable();
    }
    out
}

fn partners(m: &WeightMatrix, i: usize, flavor: Flavor) -> Vec<usize> {
    match flavor {
        Flavor::Roumieu => (i..m.ells.len()).collect(),
        Flavor::Beurling => (0..=i).rev().collect(),
    }
}

fn truncate_pair(a: &WeightSequence, b: &WeightSequence) -> (WeightSequence, WeightSequence) {
    let n = a.p_max().min(b.p_max());
    (a.truncate(n), b.truncate(n))
}

/// Matrix moderate growth `(𝓜_{[mg]})` by partner search, plus the sharp form for associated matrices.
pub fn matrix_mg(m: &WeightMatrix, flavor: Flavor) -> Verdict {
    let policy = Policy::default();
    let mut per_ell = Vec::new();
    for i in tested_ells(m, flavor, 2.0) {
        let mut found = Vec::new();
        for j in partners(m, i, flavor) {
            let (left, right) = match flavor {
                Flavor::Roumieu => truncate_pair(&m.rows[i], &m.rows[j]),
                Flavor::Beurling => truncate_pair(&m.rows[j], &m.rows[i]),
            };
            let mut v = mg_verdict(&left, &right, &policy);
            if let Some(w) = v.witness.as_mut() {
                w.label = format!("{} (ell = {}, partner {})", w.label, m.ells[i], m.ells[j]);
            }
            let hit = v.is_holds();
            found.push(v);
            if hit {
                break;
            }
        }
        per_ell.push(any_of(found, Window::new("partner", m.ells[0], m.ells[m.ells.len() - 1])));
    }
    let mut v = all_of(per_ell, ell_window(&m.ells)).with_note(grid_note(&m.ells));
    if matches!(m.provenance, Provenance::Associated { .. }) && m.ells.len() > 1 {
        let sharp = sharp_mg(m, m.effective_p_max());
        v.notes.push(format!("sharp form with partner 2 ell: {}", sharp.summary()));
        v = all_of(vec![v.clone(), sharp], v.window.clone()).with_note(grid_note(&m.ells));
    }
    v
}

/// Defect `sup_p p·log h + log M^{(a)}[p] − log M^{(b)}[p]` decided on the tail.
fn l_defect(a: &WeightSequence, b: &WeightSequence, h: f64, policy: &Policy) -> Verdict {
    let n = a.p_max().min(b.p_max());
    let window = Window::new("p", 0.0, n as f64);
    if n < 8 {
        return Verdict::inconclusive(window, 0.0).with_note("rows too short for a tail decision");
    }
    let lh = h.ln();
    let d: Vec<f64> = (0..=n).map(|p| p as f64 * lh + a.log_m()[p] - b.log_m()[p]).collect();
    let s = n.div_ceil(2).max(1);
    let x: Vec<f64> = (s..=n).map(|p| (p as f64).ln()).collect();
    let dec = bounded_above(&x, &d[s..], policy);
    let (arg, sup) = d.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let wit = match dec.state {
        State::Fails => Witness::new("L defect", n as f64, d[n]),
        _ => Witness::new("log D", arg as f64, sup),
    };
    Verdict::decided(dec.state, wit, Window::new("p", s as f64, n as f64), dec.margin)
}

/// `(𝓜_{[L]})`: for `h ∈ {2, 4, 8}` a dilation `d ∈ {2, …, 64}` on the grid absorbs `h^p`.
pub fn matrix_l(m: &WeightMatrix, flavor: Flavor) -> Verdict {
    let policy = Policy::default();
    let mut per_h = Vec::new();
    for &h in &L_FACTORS {
        let mut per_ell = Vec::new();
        for i in tested_ells(m, flavor, 2.0 * h) {
            let ell = m.ells[i];
            let mut found = Vec::new();
            for d in 2..=D_MAX {
                let target = match flavor {
                    Flavor::Roumieu => ell * d as f64,
                    Flavor::Beurling => ell / d as f64,
                };
                let Some(j) = m.index_of(target) else { continue };
                let (a, b) = match flavor {
                    Flavor::Roumieu => (&m.rows[i], &m.rows[j]),
                    Flavor::Beurling => (&m.rows[j], &m.rows[i]),
                };
                let mut v = l_defect(a, b, h, &policy);
                if let Some(w) = v.witness.as_mut() {
                    w.label = format!("{} (h = {h}, ell = {ell}, d = {d})", w.label);
                }
                let hit = v.is_holds();
                found.push(v);
                if hit {
                    break;
                }
            }
            if found.is_empty() {
                let mut v = l_defect(&m.rows[i], &m.rows[i], h, &policy);
                if let Some(w) = v.witness.as_mut() {
                    w.label = format!("{} (h = {h}, ell = {ell}, no partner)", w.label);
                }
                if v.is_holds() {
                    v = Verdict::inconclusive(v.window.clone(), 0.0).with_note("no dilation on the grid");
                }
                found.push(v);
            }
            per_ell.push(any_of(found, Window::new("d", 2.0, D_MAX as f64)));
        }
        per_h.push(all_of(per_ell, ell_window(&m.ells)));
    }
    all_of(per_h, Window::new("h", L_FACTORS[0], L_FACTORS[L_FACTORS.len() - 1])).with_note(grid_note(&m.ells))
}

/// Matrix-level relations with the quantifiers read over both grids.
pub fn matrix_relation(m: &WeightMatrix, n: &WeightMatrix, kind: MatrixRelation) -> Verdict {
    let policy = Policy::default();
    let rel = |i: usize, j: usize, k: SeqRelation| -> Verdict {
        let mut v = relation(&m.rows[i], &n.rows[j], k, &policy);
        if let Some(w) = v.witness.as_mut() {
            w.label = format!("{} (M row {}, N row {})", w.label, m.ells[i], n.ells[j]);
        }
        v
    };
    let (wm, wn) = (ell_window(&m.ells), ell_window(&n.ells));
    let out = match kind {
        MatrixRelation::RoumieuPreceq => all_of(
            (0..m.ells.len())
                .map(|i| any_of((0..n.ells.len()).map(|j| rel(i, j, SeqRelation::Preceq)).collect(), wn.clone()))
                .collect(),
            wm.clone(),
        ),
        MatrixRelation::BeurlingPreceq => all_of(
            (0..n.ells.len())
                .map(|j| any_of((0..m.ells.len()).map(|i| rel(i, j, SeqRelation::Preceq)).collect(), wm.clone()))
                .collect(),
            wn.clone(),
        ),
        MatrixRelation::Triangle => all_of(
            (0..m.ells.len())
                .map(|i| all_of((0..n.ells.len()).map(|j| rel(i, j, SeqRelation::Triangle)).collect(), wn.clone()))
                .collect(),
            wm.clone(),
        ),
        MatrixRelation::Mixed => any_of(
            (0..m.ells.len())
                .map(|i| all_of((0..n.ells.len()).map(|j| rel(i, j, SeqRelation::Preceq)).collect(), wn.clone()))
                .collect(),
            wm.clone(),
        ),
    };
    out.with_note(grid_note(&m.ells))
}

/// All rows pairwise equivalent; cross-checked against `(ω₆)` of the generating weight.
pub fn is_constant(m: &WeightMatrix) -> Verdict {
    let policy = Policy::default();
    let mut items = Vec::new();
    for i in 0..m.ells.len() {
        for j in i + 1..m.ells.len() {
            let mut v = relation(&m.rows[i], &m.rows[j], SeqRelation::Equiv, &policy);
            if let Some(w) = v.witness.as_mut() {
                w.label = format!("{} (rows {} and {})", w.label, m.ells[i], m.ells[j]);
            }
            items.push(v);
        }
    }
    let mut v = all_of(items, ell_window(&m.ells)).with_note(grid_note(&m.ells));
    if let Some(w) = &m.weight {
        if let Ok(report) = check_conditions(w, &RunConfig::default()) {
            let agree = report.omega6.state == v.state || report.omega6.state == State::Inconclusive;
            v.notes.push(format!(
                "omega6 of the generating weight: {} ({})",
                report.omega6.state,
                if agree { "consistent" } else { "disagrees" }
            ));
        }
    }
    v
}

/// `∃ ℓ₁ < ℓ` on the grid with `ℓ > 2ℓ₁` and `W^{(ℓ)} ⪯ W^{(ℓ₁)}`.
pub fn constancy_criterion(m: &WeightMatrix) -> Verdict {
    let policy = Policy::default();
    let mut items = Vec::new();
    for i in 0..m.ells.len() {
        for j in 0..m.ells.len() {
            if m.ells[j] > 2.0 * m.ells[i] * (1.0 + 1e-12) {
                let mut v = relation(&m.rows[j], &m.rows[i], SeqRelation::Preceq, &policy);
                if let Some(w) = v.witness.as_mut() {
                    w.label = format!("{} (ell = {}, ell1 = {})", w.label, m.ells[j], m.ells[i]);
                }
                items.push(v);
            }
        }
    }
    any_of(items, ell_window(&m.ells)).with_note(grid_note(&m.ells))
}

fn aligned(m: &WeightMatrix, n: &WeightMatrix) -> Result<Vec<(f64, usize, usize)>> {
    if m.p_max != n.p_max {
        return Err(invalid(format!("p_max mismatch: {} vs {}", m.p_max, n.p_max)));
    }
    let pairs: Vec<(f64, usize, usize)> = m
        .ells
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| n.index_of(l).map(|j| (l, i, j)))
        .collect();
    if pairs.is_empty() {
        return Err(invalid("the two matrices share no grid parameter"));
    }
    Ok(pairs)
}

/// Row-wise product `{M^{(ℓ)}·N^{(ℓ)}}` on the common grid.
pub fn matrix_product(m: &WeightMatrix, n: &WeightMatrix) -> Result<WeightMatrix> {
    let pairs = aligned(m, n)?;
    let mut ells = Vec::new();
    let mut rows = Vec::new();
    for (l, i, j) in pairs {
        let (a, b) = truncate_pair(&m.rows[i], &n.rows[j]);
        ells.push(l);
        rows.push(pointwise_product(&a, &b)?);
    }
    let prov = Provenance::Product { left: Box::new(m.provenance.clone()), right: Box::new(n.provenance.clone()) };
    let mut out = WeightMatrix::assemble(ells, rows, prov)?;
    out.p_max = m.p_max;
    Ok(out)
}

/// Row-wise quotient `{M^{(ℓ)}/N^{(ℓ)}}` with log-convex regularized rows.
pub fn matrix_quotient(m: &WeightMatrix, n: &WeightMatrix) -> Result<WeightMatrix> {
    let prov = Provenance::Quotient { num: Box::new(m.provenance.clone()), den: Box::new(n.provenance.clone()) };
    quotient_with(m, n, prov)
}

/// `𝓜/G^α := {M^{(ℓ)}/G^α}`.
pub fn gevrey_quotient(m: &WeightMatrix, alpha: f64) -> Result<WeightMatrix> {
    let g = gevrey(alpha, m.p_max)?;
    let den = WeightMatrix::constant(&g, m.ells.clone())?;
    let mut den = den;
    den.p_max = m.p_max;
    let prov = Provenance::GevreyQuotient { inner: Box::new(m.provenance.clone()), alpha };
    quotient_with(m, &den, prov)
}

fn quotient_with(m: &WeightMatrix, n: &WeightMatrix, prov: Provenance) -> Result<WeightMatrix> {
    let pairs = aligned(m, n)?;
    let mut ells = Vec::new();
    let mut rows = Vec::new();
    let mut reg = Vec::new();
    for (l, i, j) in pairs {
        let (a, b) = truncate_pair(&m.rows[i], &n.rows[j]);
        let q = pointwise_quotient(&a, &b)?;
        ells.push(l);
        reg.push(regularize(&q));
        rows.push(q);
    }
    let degenerate = matrix_relation(n, m, MatrixRelation::Triangle).is_fails();
    let mut out = WeightMatrix::assemble(ells, rows, prov)?;
    out.p_max = m.p_max;
    out.regularized = Some(reg);
    out.degenerate = degenerate;
    Ok(out)
}

/// Log-convex minorant shifted so that `log Q[0] = 0`.
pub fn regularize(q: &WeightSequence) -> WeightSequence {
    let h = log_convex_minorant(q);
    let c = h.log_m()[0];
    WeightSequence::from_log(h.log_m().iter().map(|v| v - c).collect()).expect("finite")
}

/// Equivalence of each raw quotient row with its regularization.
pub fn regularization_check(m: &WeightMatrix) -> Verdict {
    let policy = Policy::default();
    let Some(reg) = &m.regularized else {
        return Verdict::inconclusive(ell_window(&m.ells), 0.0).with_note("matrix has no regularized rows");
    };
    let items = m
        .rows
        .iter()
        .zip(reg)
        .zip(&m.ells)
        .map(|((r, q), l)| {
            let mut v = relation(r, q, SeqRelation::Equiv, &policy);
            if let Some(w) = v.witness.as_mut() {
                w.label = format!("{} (ell = {l})", w.label);
            }
            v
        })
        .collect();
    all_of(items, ell_window(&m.ells)).with_note(grid_note(&m.ells))
}

/// `θ^{(cℓ)}_p = (θ^{(ℓ)}_{c(p−1)+1} ⋯ θ^{(ℓ)}_{cp})^{1/c}` and its dual for `ℓ/c`.
pub fn quotient_sequence_identity(m: &WeightMatrix, ell: f64, c: usize) -> Result<Verdict> {
    if c == 0 {
        return Err(invalid("c must be a positive integer"));
    }
    let i = m.index_of(ell).ok_or_else(|| invalid(format!("ell = {ell} is not on the grid")))?;
    let j = m
        .index_of(c as f64 * ell)
        .ok_or_else(|| invalid(format!("c*ell = {} is not on the grid", c as f64 * ell)))?;
    let mut items = vec![theta_identity(&m.rows[i], &m.rows[j], c, &format!("theta^({})", c as f64 * ell))];
    let mut notes = Vec::new();
    match m.index_of(ell / c as f64) {
        Some(k) => items.push(theta_identity(&m.rows[k], &m.rows[i], c, &format!("theta^({ell}) dual"))),
        None => notes.push(format!("dual identity skipped: ell/c = {} is not on the grid", ell / c as f64)),
    }
    let mut v = all_of(items, Window::new("ell", ell / c as f64, c as f64 * ell));
    v.notes.extend(notes);
    Ok(v)
}

/// Checks `log θ^{coarse}[p] = (1/c) Σ_{k=c(p−1)+1}^{cp} log θ^{fine}[k]`.
fn theta_identity(fine: &WeightSequence, coarse: &WeightSequence, c: usize, label: &str) -> Verdict {
    let n = coarse.p_max().min(fine.p_max() / c);
    let window = Window::new("p", 1.0, n as f64);
    let (mu_f, mu_c) = (fine.log_mu(), coarse.log_mu());
    let mut worst = (0.0f64, 0usize);
    for p in 1..=n {
        let rhs: f64 = mu_f[c * (p - 1) + 1..=c * p].iter().sum::<f64>() / c as f64;
        let d = (mu_c[p] - rhs).abs();
        if d > worst.0 {
            worst = (d, p);
        }
    }
    let wit = Witness::new(format!("{label} log deviation"), worst.1 as f64, worst.0);
    if n == 0 {
        return Verdict::inconclusive(window, 0.0).with_note("no index with c*p inside the rows");
    }
    let state = if worst.0 <= IDENTITY_TOL { State::Holds } else { State::Fails };
    Verdict::decided(state, wit, window, IDENTITY_TOL - worst.0)
}

/// Outcome of the sandwich estimate `ℓ·ω_{W^{(ℓ)}} ≤ ω ≤ 2ℓ·ω_{W^{(ℓ)}} + D_ℓ` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub ell: f64,
    /// Fitted `D_ℓ = max_t (ω(t) − 2ℓ·ω_{W^{(ℓ)}}(t))`.
    #[serde(with = "crate::verdict::ext_f64")]
    pub d_fit: f64,
    /// Grid points where the lower inequality fails beyond the slack.
    pub violations: usize,
    pub points: usize,
    #[serde(with = "crate::verdict::ext_f64")]
    pub t_max: f64,
    /// Tail boundedness of `ω − 2ℓ·ω_{W^{(ℓ)}}`.
    pub upper_bounded: Verdict,
}

/// Relative slack for the lower half of the sandwich (it is an equality for some weights).
pub const SANDWICH_SLACK: f64 = 1e-9;

pub fn sandwich(m: &WeightMatrix, ell: f64, cfg: &RunConfig) -> Result<SandwichReport> {
    let w = m.weight.as_ref().ok_or_else(|| invalid("sandwich needs an associated matrix"))?;
    let row = m.row(ell).ok_or_else(|| invalid(format!("ell = {ell} is not on the grid")))?;
    let wr = WeightFunction::assoc(row)?;
    let hi = cfg.t_max.min(wr.horizon()).min(w.horizon());
    if !(hi > cfg.t_min) {
        return Err(Error::Horizon(format!("row ell = {ell} leaves no t-window")));
    }
    let ts = log_grid(cfg.t_min, hi, cfg.t_points);
    let mut violations = 0;
    let mut d_fit = f64::NEG_INFINITY;
    let mut x = Vec::with_capacity(ts.len());
    let mut gap = Vec::with_capacity(ts.len());
    for &t in &ts {
        let o = w.eval(t)?;
        let a = wr.eval(t)?;
        if ell * a > o + SANDWICH_SLACK * o.abs().max(1.0) {
            violations += 1;
        }
        let g = o - 2.0 * ell * a;
        d_fit = d_fit.max(g);
        x.push(t.ln());
        gap.push(g);
    }
    let policy = cfg.policy();
    let s = tail_start(x.len(), policy.fn_tail);
    let dec = bounded_above(&x[s..], &gap[s..], &policy);
    let wit = Witness::new("D", ell, d_fit);
    let upper_bounded = Verdict::decided(dec.state, wit, Window::new("t", ts[s], hi), dec.margin);
    Ok(SandwichReport { ell, d_fit, violations, points: ts.len(), t_max: hi, upper_bounded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = gevrey(1.0, 12).unwrap();
        let m = WeightMatrix::from_rows(vec![0.5, 1.0], vec![g.clone(), g.scale_geometric(2.0)]).unwrap();
        let back = WeightMatrix::from_json(&m.to_json()).unwrap();
        assert_eq!(back.ells(), m.ells());
        assert_eq!(back.rows(), m.rows());
        assert_eq!(back.provenance(), &Provenance::Raw);
    }

    #[test]
    fn rejects_unsorted_grid() {
        let g = gevrey(1.0, 12).unwrap();
        assert!(WeightMatrix::from_rows(vec![1.0, 0.5], vec![g.clone(), g]).is_err());
    }
}
