//! Executable verification suites with structured reports, and the obstruction numerics.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::verdict::{GrowthIndexEstimate, State, Verdict, Window, Witness};

mod obstruction;
mod suites;

pub use obstruction::{obstruction_demo, obstruction_schedule, ObstructionSchedule, ObstructionTrace};
pub use suites::{suite_division, suite_index_transport, suite_lower_product, suite_upper_welldef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimState {
    Holds,
    Fails,
    Inconclusive,
    /// Not evaluated because a guard or premise did not hold.
    Skipped,
}

impl From<State> for ClaimState {
    fn from(s: State) -> Self {
        match s {
            State::Holds => ClaimState::Holds,
            State::Fails => ClaimState::Fails,
            State::Inconclusive => ClaimState::Inconclusive,
        }
    }
}

impl ClaimState {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimState::Holds => "holds",
            ClaimState::Fails => "fails",
            ClaimState::Inconclusive => "inconclusive",
            ClaimState::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub state: ClaimState,
    pub witness: Option<Witness>,
    #[serde(with = "crate::verdict::ext_f64")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Claim {
    pub fn from_verdict(id: impl Into<String>, v: Verdict) -> Self {
        Claim { id: id.into(), state: v.state.into(), witness: v.witness, margin: v.margin, notes: v.notes }
    }

    pub fn skipped(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Claim { id: id.into(), state: ClaimState::Skipped, witness: None, margin: 0.0, notes: vec![reason.into()] }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

/// Outcome of one verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: Value,
    pub claims: Vec<Claim>,
    pub summary: Summary,
    /// Set when a hypothesis failed and the remaining claims were not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<Value>,
}

impl SuiteReport {
    pub(crate) fn new(suite: &str, params: Value) -> Self {
        SuiteReport {
            suite: suite.into(),
            params,
            claims: Vec::new(),
            summary: Summary::default(),
            aborted: None,
            artifacts: None,
        }
    }

    pub(crate) fn push(&mut self, claim: Claim) {
        match claim.state {
            ClaimState::Holds => self.summary.holds += 1,
            ClaimState::Fails => self.summary.fails += 1,
            ClaimState::Inconclusive => self.summary.inconclusive += 1,
            ClaimState::Skipped => self.summary.skipped += 1,
        }
        self.claims.push(claim);
    }

    pub(crate) fn verdict(&mut self, id: &str, v: Verdict) {
        self.push(Claim::from_verdict(id, v));
    }

    pub(crate) fn abort(mut self, reason: impl Into<String>) -> Self {
        self.aborted = Some(reason.into());
        self
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    /// 0 when every evaluated claim holds, 1 on any failure, 2 when only inconclusive ones remain.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fails > 0 {
            1
        } else if self.summary.inconclusive > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Inputs shared by every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct SuiteOptions {
    pub cfg: RunConfig,
    /// Apply the suite's documented negative-control perturbation.
    pub perturb: bool,
}


impl SuiteOptions {
    pub fn perturbed(mut self) -> Self {
        self.perturb = true;
        self
    }
}

/// `Σ lhs ≤ Σ rhs` between index brackets, with one bracket width of slack.
pub(crate) fn bracket_leq(
    label: &str,
    lhs: &[&GrowthIndexEstimate],
    rhs: &[&GrowthIndexEstimate],
) -> Verdict {
    let all: Vec<&&GrowthIndexEstimate> = lhs.iter().chain(rhs.iter()).collect();
    let window = Window::new("bracket", 0.0, f64::INFINITY);
    if all.iter().any(|g| g.lower <= 0.0 && g.upper.is_infinite()) {
        return Verdict::inconclusive(window, 0.0).with_note(format!("{label}: an index bracket is unbounded"));
    }
    let lo: f64 = lhs.iter().map(|g| g.lower).sum();
    let hi: f64 = rhs.iter().map(|g| g.upper).sum();
    let slack = all.iter().map(|g| g.width()).filter(|w| w.is_finite()).fold(0.0, f64::max);
    let margin = hi + slack - lo;
    let state = if margin >= 0.0 { State::Holds } else { State::Fails };
    Verdict::decided(state, Witness::new(label, lo, hi), window, margin)
        .with_note(format!("lhs lower sum {lo}, rhs upper sum {hi}, slack {slack}"))
}

pub(crate) fn bracket_json(g: &GrowthIndexEstimate) -> Value {
    serde_json::to_value(g).expect("serializable")
}
