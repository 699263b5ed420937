//! Weight functions: catalog entries, associated functions of sequences, and combinators.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conjugate::{self, ConjOptions};
use crate::error::{invalid, Error, Result};
use crate::seqcore::{log_convex_minorant, WeightSequence};

mod conditions;
mod index;
mod legendre;

pub use conditions::{check_conditions, fn_relation, strong_nq, ConditionReport, FnRelation};
pub use index::{gamma_bar_index, gamma_index, IndexOptions};
pub use legendre::{phi_star, phi_star_with, PhiStarOptions};

/// Reconstructible description of a weight function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    IdPower { x: f64 },
    NormalizedIdPower { x: f64 },
    LogPower { k: f64 },
    Zero,
    Table { t: Vec<f64>, value: Vec<f64> },
    Assoc { seq: WeightSequence },
    Affine { inner: Box<Kind>, scale: f64, shift: f64 },
    Power { inner: Box<Kind>, alpha: f64 },
    Invert { inner: Box<Kind> },
    Lower { sigma: Box<Kind>, tau: Box<Kind> },
    Upper { sigma: Box<Kind>, tau: Box<Kind> },
}

#[derive(Debug)]
struct Assoc {
    seq: WeightSequence,
    /// log M of the log-convex minorant.
    hull: Vec<f64>,
    /// log μ_p of the minorant for p = 1..=p_max (nondecreasing).
    mu: Vec<f64>,
}

impl Assoc {
    fn phi(&self, y: f64) -> Result<f64> {
        let top = *self.mu.last().expect("p_max >= 1");
        if y > top + 1e-12 {
            return Err(Error::Domain { t: y.exp(), lo: 0.0, hi: top.exp() });
        }
        let k = self.mu.partition_point(|&m| m <= y);
        if k == 0 {
            return Ok(0.0);
        }
        Ok((k as f64 * y - self.hull[k]).max(0.0))
    }
}

#[derive(Debug)]
enum Node {
    IdPower(f64),
    NormIdPower(f64),
    LogPower(f64),
    Zero,
    Table { t: Vec<f64>, v: Vec<f64> },
    Assoc(Assoc),
    Affine { inner: WeightFunction, scale: f64, shift: f64 },
    Power { inner: WeightFunction, alpha: f64 },
    Invert { inner: WeightFunction },
    Lower { sigma: WeightFunction, tau: WeightFunction, opts: ConjOptions },
    Upper { sigma: WeightFunction, tau: WeightFunction, opts: ConjOptions },
}

/// An evaluable weight `t ↦ ω(t)` with a validity horizon.
///
/// Cloning is cheap; the evaluator tree is shared and immutable.
#[derive(Clone, Debug)]
pub struct WeightFunction {
    node: Arc<Node>,
    horizon: f64,
    hint: (f64, f64),
}

const DEFAULT_HINT: (f64, f64) = (1.0, 1e8);

fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

impl WeightFunction {
    fn build(node: Node, horizon: f64, check: bool) -> Result<Self> {
        let hi = DEFAULT_HINT.1.min(horizon);
        let lo = DEFAULT_HINT.0.min(hi);
        let w = WeightFunction { node: Arc::new(node), horizon, hint: (lo, hi) };
        if check {
            w.check_monotone()?;
        }
        Ok(w)
    }

    fn check_monotone(&self) -> Result<()> {
        let (lo, hi) = self.hint;
        if hi <= lo {
            return Ok(());
        }
        let grid = crate::tail::log_grid(lo, hi, 64);
        let mut prev = f64::NEG_INFINITY;
        for &t in &grid {
            let v = self.eval(t)?;
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(invalid(format!("weight is decreasing near t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// `ω(t) = t^x`.
    pub fn id_power(x: f64) -> Result<Self> {
        positive("id_power exponent", x)?;
        Self::build(Node::IdPower(x), f64::INFINITY, true)
    }

    /// `ω(t) = 0` on `[0, 1]` and `(t − 1)^x` beyond.
    pub fn normalized_id_power(x: f64) -> Result<Self> {
        positive("normalized_id_power exponent", x)?;
        Self::build(Node::NormIdPower(x), f64::INFINITY, true)
    }

    /// `ω(t) = log(1 + t)^k`.
    pub fn log_power(k: f64) -> Result<Self> {
        positive("log_power exponent", k)?;
        Self::build(Node::LogPower(k), f64::INFINITY, true)
    }

    /// The zero function (not a weight in the strict sense; useful as a conjugate probe).
    pub fn zero() -> Self {
        Self::build(Node::Zero, f64::INFINITY, false).expect("zero is valid")
    }

    /// Piecewise-linear interpolation through `(t_i, v_i)`, constant before the first knot.
    pub fn custom_table(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.is_empty() {
            return Err(invalid("table needs equally many knots and values"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t[0] < 0.0 {
            return Err(invalid("table knots must be increasing and nonnegative"));
        }
        if v.windows(2).any(|w| w[1] < w[0]) || v.iter().any(|&x| !(x >= 0.0)) {
            return Err(invalid("table values must be nonnegative and nondecreasing"));
        }
        let h = *t.last().expect("nonempty");
        Self::build(Node::Table { t, v }, h, true)
    }

    /// Associated function `ω_M(t) = sup_p log(t^p / M_p)`.
    pub fn assoc(seq: &WeightSequence) -> Result<Self> {
        if seq.p_max() < 1 {
            return Err(invalid("associated function needs p_max >= 1"));
        }
        if seq.log_m()[0].abs() > 1e-12 {
            return Err(invalid("associated function needs a normalized sequence (M_0 = 1)"));
        }
        let hull = log_convex_minorant(seq).log_m().to_vec();
        let mu: Vec<f64> = hull.windows(2).map(|w| w[1] - w[0]).collect();
        let horizon = mu.last().expect("p_max >= 1").exp();
        let node = Node::Assoc(Assoc { seq: seq.clone(), hull, mu });
        Self::build(node, horizon, false)
    }

    /// `a·ω + b` with `a > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        positive("affine scale", scale)?;
        if !shift.is_finite() {
            return Err(invalid("affine shift must be finite"));
        }
        let node = Node::Affine { inner: self.clone(), scale, shift };
        Self::build(node, self.horizon, false)
    }

    /// `ω^{1/α}(t) = ω(t^{1/α})`.
    pub fn power_substitute(&self, alpha: f64) -> Result<Self> {
        positive("power substitution exponent", alpha)?;
        let h = if self.horizon.is_finite() { self.horizon.powf(alpha) } else { f64::INFINITY };
        Self::build(Node::Power { inner: self.clone(), alpha }, h, false)
    }

    /// `ω^ι(t) = ω(1/t)` on `(0, ∞)`.
    pub fn invert(&self) -> Self {
        let node = Node::Invert { inner: self.clone() };
        let mut w = Self::build(node, f64::INFINITY, false).expect("no check");
        if self.horizon.is_finite() {
            w.hint.0 = w.hint.0.max(1.0 / self.horizon);
        }
        w
    }

    pub(crate) fn lower_node(sigma: &Self, tau: &Self, opts: ConjOptions) -> Self {
        let h = sigma.horizon * tau.horizon;
        let node = Node::Lower { sigma: sigma.clone(), tau: tau.clone(), opts };
        Self::build(node, h, false).expect("no check")
    }

    pub(crate) fn upper_node(sigma: &Self, tau: &Self, opts: ConjOptions) -> Self {
        let node = Node::Upper { sigma: sigma.clone(), tau: tau.clone(), opts };
        Self::build(node, sigma.horizon, false).expect("no check")
    }

    pub fn from_kind(kind: &Kind) -> Result<Self> {
        Ok(match kind {
            Kind::IdPower { x } => Self::id_power(*x)?,
            Kind::NormalizedIdPower { x } => Self::normalized_id_power(*x)?,
            Kind::LogPower { k } => Self::log_power(*k)?,
            Kind::Zero => Self::zero(),
            Kind::Table { t, value } => Self::custom_table(t.clone(), value.clone())?,
            Kind::Assoc { seq } => Self::assoc(seq)?,
            Kind::Affine { inner, scale, shift } => Self::from_kind(inner)?.affine(*scale, *shift)?,
            Kind::Power { inner, alpha } => Self::from_kind(inner)?.power_substitute(*alpha)?,
            Kind::Invert { inner } => Self::from_kind(inner)?.invert(),
            Kind::Lower { sigma, tau } => {
                conjugate::lower_fn(&Self::from_kind(sigma)?, &Self::from_kind(tau)?, ConjOptions::default())
            }
            Kind::Upper { sigma, tau } => {
                conjugate::upper_fn(&Self::from_kind(sigma)?, &Self::from_kind(tau)?, ConjOptions::default())
            }
        })
    }

    pub fn kind(&self) -> Kind {
        match &*self.node {
            Node::IdPower(x) => Kind::IdPower { x: *x },
            Node::NormIdPower(x) => Kind::NormalizedIdPower { x: *x },
            Node::LogPower(k) => Kind::LogPower { k: *k },
            Node::Zero => Kind::Zero,
            Node::Table { t, v } => Kind::Table { t: t.clone(), value: v.clone() },
            Node::Assoc(a) => Kind::Assoc { seq: a.seq.clone() },
            Node::Affine { inner, scale, shift } => {
                Kind::Affine { inner: Box::new(inner.kind()), scale: *scale, shift: *shift }
            }
            Node::Power { inner, alpha } => Kind::Power { inner: Box::new(inner.kind()), alpha: *alpha },
            Node::Invert { inner } => Kind::Invert { inner: Box::new(inner.kind()) },
            Node::Lower { sigma, tau, .. } => {
                Kind::Lower { sigma: Box::new(sigma.kind()), tau: Box::new(tau.kind()) }
            }
            Node::Upper { sigma, tau, .. } => {
                Kind::Upper { sigma: Box::new(sigma.kind()), tau: Box::new(tau.kind()) }
            }
        }
    }

    /// Short human-readable form used in report parameter blocks.
    pub fn describe(&self) -> String {
        match &*self.node {
            Node::IdPower(x) => format!("id_power({x})"),
            Node::NormIdPower(x) => format!("normalized_id_power({x})"),
            Node::LogPower(k) => format!("log_power({k})"),
            Node::Zero => "zero".into(),
            Node::Table { t, .. } => format!("table({} knots)", t.len()),
            Node::Assoc(a) => {
                let lm = a.seq.log_m();
                let p = lm.len() - 1;
                format!("assoc(p_max = {p}, logM[p_max] = {:.6})", lm[p])
            }
            Node::Affine { inner, scale, shift } => format!("{scale}*{} + {shift}", inner.describe()),
            Node::Power { inner, alpha } => format!("pow({}, {alpha})", inner.describe()),
            Node::Invert { inner } => format!("inv({})", inner.describe()),
            Node::Lower { sigma, tau, .. } => format!("lower({}, {})", sigma.describe(), tau.describe()),
            Node::Upper { sigma, tau, .. } => format!("upper({}, {})", sigma.describe(), tau.describe()),
        }
    }

    /// Largest argument at which the evaluator is trusted.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Recommended `[t_min, t_max]` for log grids.
    pub fn domain_hint(&self) -> (f64, f64) {
        self.hint
    }

    /// The generating sequence when this is an associated function.
    pub fn assoc_sequence(&self) -> Option<&WeightSequence> {
        match &*self.node {
            Node::Assoc(a) => Some(&a.seq),
            _ => None,
        }
    }

    pub fn is_inverted(&self) -> bool {
        matches!(&*self.node, Node::Invert { .. })
    }

    /// `ω(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain { t, lo: 0.0, hi: self.horizon });
        }
        if t == 0.0 {
            return self.at_zero();
        }
        if t.is_infinite() {
            return Err(Error::Domain { t, lo: 0.0, hi: self.horizon });
        }
        self.phi(t.ln())
    }

    fn at_zero(&self) -> Result<f64> {
        match &*self.node {
            Node::Table { v, .. } => Ok(v[0]),
            Node::Affine { inner, scale, shift } => Ok(scale * inner.at_zero()? + shift),
            Node::Power { inner, .. } => inner.at_zero(),
            Node::Invert { .. } => Err(Error::Domain { t: 0.0, lo: 0.0, hi: f64::INFINITY }),
            Node::Lower { sigma, tau, .. } => Ok(sigma.at_zero()? + tau.at_zero()?),
            Node::Upper { sigma, tau, .. } => Ok(sigma.at_zero()? - tau.at_zero()?),
            _ => Ok(0.0),
        }
    }

    /// `φ_ω(y) = ω(e^y)`, evaluated without forming `e^y` where possible.
    pub fn phi(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::Domain { t: f64::NAN, lo: 0.0, hi: self.horizon });
        }
        if y == f64::NEG_INFINITY {
            return self.at_zero();
        }
        match &*self.node {
            Node::IdPower(x) => Ok((x * y).exp()),
            Node::NormIdPower(x) => {
                if y <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok((x * (y + (-(-y).exp()).ln_1p())).exp())
                }
            }
            Node::LogPower(k) => Ok(softplus(y).powf(*k)),
            Node::Zero => Ok(0.0),
            Node::Table { t, v } => {
                let x = y.exp();
                let last = *t.last().expect("nonempty");
                if x > last * (1.0 + 1e-12) {
                    return Err(Error::Domain { t: x, lo: 0.0, hi: last });
                }
                let j = t.partition_point(|&k| k <= x);
                if j == 0 {
                    return Ok(v[0]);
                }
                if j == t.len() {
                    return Ok(v[t.len() - 1]);
                }
                let s = (x - t[j - 1]) / (t[j] - t[j - 1]);
                Ok(v[j - 1] + s * (v[j] - v[j - 1]))
            }
            Node::Assoc(a) => a.phi(y),
            Node::Affine { inner, scale, shift } => Ok(scale * inner.phi(y)? + shift),
            Node::Power { inner, alpha } => inner.phi(y / alpha),
            Node::Invert { inner } => inner.phi(-y),
            Node::Lower { sigma, tau, opts } => conjugate::lower_point_log(sigma, tau, y, opts).map(|p| p.value),
            Node::Upper { sigma, tau, opts } => {
                let p = conjugate::upper_point_log(sigma, tau, y, opts)?;
                if p.uncertain {
                    return Err(Error::Horizon(format!(
                        "upper conjugate objective still rising at the s-window edge for t = {}",
                        y.exp()
                    )));
                }
                Ok(p.value)
            }
        }
    }

    /// Evaluates on a grid, failing on the first error.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be a positive real, got {x}")))
    }
}

/// Catalog lookup by tag: `id_power`, `normalized_id_power`, `log_power`, `zero`.
pub fn catalog(tag: &str, params: &[f64]) -> Result<WeightFunction> {
    let one = || -> Result<f64> {
        match params {
            [x] => Ok(*x),
            _ => Err(invalid(format!("{tag} takes exactly one parameter"))),
        }
    };
    match tag {
        "id_power" => WeightFunction::id_power(one()?),
        "normalized_id_power" => WeightFunction::normalized_id_power(one()?),
        "log_power" => WeightFunction::log_power(one()?),
        "zero" => Ok(WeightFunction::zero()),
        other => Err(invalid(format!("unknown catalog tag: {other}"))),
    }
}

/// Brute-force `max_p (p·log t − log M_p)`; the reference evaluator for associated functions.
pub fn assoc_brute_force(seq: &WeightSequence, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let y = t.ln();
    seq.log_m()
        .iter()
        .enumerate()
        .map(|(p, lm)| p as f64 * y - lm)
        .fold(f64::NEG_INFINITY, f64::max)
}
