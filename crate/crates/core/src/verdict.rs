use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Holds,
    Fails,
    Inconclusive,
}

impl State {
    pub fn as_str(self) -> &'static str {
        match self {
            State::Holds => "holds",
            State::Fails => "fails",
            State::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the decisive comparison happened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    #[serde(with = "ext_f64")]
    pub at: f64,
    #[serde(with = "ext_f64")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also: Vec<f64>,
}

impl Witness {
    pub fn new(label: impl Into<String>, at: f64, value: f64) -> Self {
        Witness { label: label.into(), at, value, also: Vec::new() }
    }

    pub fn with_also(mut self, also: Vec<f64>) -> Self {
        self.also = also;
        self
    }
}

/// The scanned range, in index units (`p`) or argument units (`t`, `s`, `ell`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub label: String,
    #[serde(with = "ext_f64")]
    pub lo: f64,
    #[serde(with = "ext_f64")]
    pub hi: f64,
}

impl Window {
    pub fn new(label: impl Into<String>, lo: f64, hi: f64) -> Self {
        Window { label: label.into(), lo, hi }
    }
}

/// Tri-state outcome of a check on a finite window.
///
/// `Holds` and `Fails` always carry a witness; the constructors enforce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub state: State,
    pub witness: Option<Witness>,
    pub window: Window,
    #[serde(with = "ext_f64")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn holds(witness: Witness, window: Window, margin: f64) -> Self {
        Verdict { state: State::Holds, witness: Some(witness), window, margin, notes: Vec::new() }
    }

    pub fn fails(witness: Witness, window: Window, margin: f64) -> Self {
        Verdict { state: State::Fails, witness: Some(witness), window, margin, notes: Vec::new() }
    }

    pub fn inconclusive(window: Window, margin: f64) -> Self {
        Verdict { state: State::Inconclusive, witness: None, window, margin, notes: Vec::new() }
    }

    pub fn decided(state: State, witness: Witness, window: Window, margin: f64) -> Self {
        match state {
            State::Inconclusive => {
                let mut v = Verdict::inconclusive(window, margin);
                v.witness = Some(witness);
                v
            }
            _ => Verdict { state, witness: Some(witness), window, margin, notes: Vec::new() },
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn is_holds(&self) -> bool {
        self.state == State::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.state == State::Fails
    }

    pub fn summary(&self) -> String {
        match &self.witness {
            Some(w) => format!(
                "{} ({} at {} = {}, window {} in [{}, {}])",
                self.state, w.label, w.at, w.value, self.window.label, self.window.lo, self.window.hi
            ),
            None => format!(
                "{} (window {} in [{}, {}])",
                self.state, self.window.label, self.window.lo, self.window.hi
            ),
        }
    }
}

/// Universal quantifier over finitely many verdicts.
pub fn all_of(items: Vec<Verdict>, window: Window) -> Verdict {
    if items.is_empty() {
        return Verdict::holds(Witness::new("vacuous", 0.0, 0.0), window, 0.0)
            .with_note("empty quantifier range");
    }
    if let Some(f) = items.iter().find(|v| v.is_fails()) {
        return Verdict { window, ..f.clone() };
    }
    if let Some(i) = items.iter().find(|v| v.state == State::Inconclusive) {
        return Verdict { window, ..i.clone() };
    }
    let weakest = items
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .cloned()
        .expect("non-empty");
    Verdict { window, ..weakest }
}

/// Existential quantifier over finitely many verdicts.
pub fn any_of(items: Vec<Verdict>, window: Window) -> Verdict {
    if let Some(h) = items
        .iter()
        .filter(|v| v.is_holds())
        .max_by(|a, b| a.margin.total_cmp(&b.margin))
    {
        return Verdict { window, ..h.clone() };
    }
    if let Some(i) = items.iter().find(|v| v.state == State::Inconclusive) {
        return Verdict { window, ..i.clone() };
    }
    match items.into_iter().next() {
        Some(f) => Verdict { window, ..f },
        None => Verdict::inconclusive(window, 0.0).with_note("empty quantifier range"),
    }
}

/// Combines two one-sided verdicts (for example both directions of an equivalence).
pub fn both(a: Verdict, b: Verdict, window: Window) -> Verdict {
    all_of(vec![a, b], window)
}

/// Numeric bracket for a growth index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthIndexEstimate {
    pub lower: f64,
    #[serde(with = "ext_f64")]
    pub upper: f64,
    pub witnesses: Vec<IndexWitness>,
    pub window: String,
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexWitness {
    pub index: f64,
    pub param: f64,
    #[serde(with = "ext_f64")]
    pub achieved: f64,
}

impl GrowthIndexEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn wide(window: impl Into<String>) -> Self {
        GrowthIndexEstimate {
            lower: 0.0,
            upper: f64::INFINITY,
            witnesses: Vec::new(),
            window: window.into(),
            flagged: true,
        }
    }
}

/// Serializes non-finite floats as the strings "inf", "-inf" and "nan" so JSON stays lossless.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
