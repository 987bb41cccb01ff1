//! Scenario files: one JSON document per run.
//!
//! ```json
//! { "schema_version": 1, "kind": "bayes", "description": "...", "params": { ... } }
//! ```
//!
//! Unknown fields are rejected at every level. Complex numbers are `[re, im]`
//! pairs and matrices are row-major nested lists of them.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use super::CliError;
use crate::bb84::Attack;
use crate::hilbert::{ModeDims, Operator};

pub const SCHEMA_VERSION: u64 = 1;

const TOP_LEVEL_KEYS: [&str; 4] = ["schema_version", "kind", "description", "params"];

/// A parsed scenario; `source` is the document as read, echoed into results.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub description: Option<String>,
    pub kind: ScenarioKind,
    pub source: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    Bayes(BayesParams),
    Retrodict(RetrodictParams),
    Detector(DetectorParams),
    Synthesis(SynthesisParams),
    Scissors(ScissorsParams),
    Bb84(Bb84Params),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Bayes(_) => "bayes",
            ScenarioKind::Retrodict(_) => "retrodict",
            ScenarioKind::Detector(_) => "detector",
            ScenarioKind::Synthesis(_) => "synthesis",
            ScenarioKind::Scissors(_) => "scissors",
            ScenarioKind::Bb84(_) => "bb84",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesParams {
    pub events: Vec<String>,
    pub priors: Vec<f64>,
    pub outcomes: Vec<String>,
    /// `conditional[i][j] = P(outcome j | event i)`.
    pub conditional: Vec<Vec<f64>>,
    #[serde(default)]
    pub observed: Option<String>,
}

/// An operator written as a pure state, an explicit matrix or a real diagonal.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default)]
    pub ket: Option<Vec<[f64; 2]>>,
    /// Multiplies `|ket⟩⟨ket|`; only valid together with `ket`.
    #[serde(default)]
    pub weight: Option<f64>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub diagonal: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleEntry {
    pub label: String,
    pub prior: f64,
    pub state: OperatorSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PomEntry {
    pub label: String,
    pub element: OperatorSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrodictParams {
    pub ensemble: Vec<EnsembleEntry>,
    pub pom: Vec<PomEntry>,
    /// Outcome labels for subset-restricted prediction.
    #[serde(default)]
    pub subset: Option<Vec<String>>,
    /// Outcome whose posterior is reported on its own; must be possible.
    #[serde(default)]
    pub observed: Option<String>,
    /// Tolerance for the unbiased-source test.
    #[serde(default)]
    pub unbiased_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub n: usize,
    pub eta: f64,
    pub cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisParams {
    pub reference: Vec<[f64; 2]>,
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScissorsParams {
    pub reference: Vec<[f64; 2]>,
    pub theta: f64,
    #[serde(default = "default_scissors_cutoff")]
    pub cutoff: usize,
}

fn default_scissors_cutoff() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bb84Params {
    #[serde(default)]
    pub slots: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub attack: Attack,
    #[serde(default)]
    pub emit_records: bool,
}

fn params<T: DeserializeOwned>(kind: &str, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Parse(format!("{kind} params: {e}")))
}

/// Parses and structurally checks a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let source: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid JSON: {e}")))?;
    let obj = source.as_object().ok_or_else(|| CliError::Parse("scenario must be a JSON object".into()))?;
    if let Some(key) = obj.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
        return Err(CliError::Parse(format!("unknown field `{key}`")));
    }
    match obj.get("schema_version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(CliError::Parse(format!("unsupported schema_version {other}"))),
        None => return Err(CliError::Parse("missing field `schema_version`".into())),
    }
    let kind =
        obj.get("kind").and_then(Value::as_str).ok_or_else(|| CliError::Parse("missing string field `kind`".into()))?;
    let description = match obj.get("description") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(CliError::Parse("`description` must be a string".into())),
    };
    let raw = obj.get("params").cloned().unwrap_or_else(|| Value::Object(Default::default()));
    let kind = match kind {
        "bayes" => ScenarioKind::Bayes(params(kind, raw)?),
        "retrodict" => ScenarioKind::Retrodict(params(kind, raw)?),
        "detector" => ScenarioKind::Detector(params(kind, raw)?),
        "synthesis" => ScenarioKind::Synthesis(params(kind, raw)?),
        "scissors" => ScenarioKind::Scissors(params(kind, raw)?),
        "bb84" => ScenarioKind::Bb84(params(kind, raw)?),
        other => return Err(CliError::Parse(format!("unknown scenario kind `{other}`"))),
    };
    Ok(Scenario { description, kind, source })
}

pub(crate) fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl OperatorSpec {
    /// Builds the single-mode operator, or explains what is wrong with it.
    pub fn build(&self, what: &str) -> Result<Operator, CliError> {
        let invalid = |msg: String| CliError::Validation(format!("{what}: {msg}"));
        let given = [self.ket.is_some(), self.matrix.is_some(), self.diagonal.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(invalid("give exactly one of `ket`, `matrix`, `diagonal`".into()));
        }
        if self.weight.is_some() && self.ket.is_none() {
            return Err(invalid("`weight` only applies to `ket`".into()));
        }
        let op = if let Some(ket) = &self.ket {
            let v: Vec<Complex64> = ket.iter().map(complex).collect();
            let dims = ModeDims::single(v.len()).map_err(|e| invalid(e.to_string()))?;
            let weight = self.weight.unwrap_or(1.0);
            if !weight.is_finite() || weight < 0.0 {
                return Err(invalid(format!("weight {weight} must be nonnegative")));
            }
            Operator::projector(&dims, &v).map_err(|e| invalid(e.to_string()))?.scale_real(weight)
        } else if let Some(rows) = &self.matrix {
            let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(complex).collect()).collect();
            Operator::from_rows(&rows).map_err(|e| invalid(e.to_string()))?
        } else {
            let diag = self.diagonal.as_deref().unwrap_or_default();
            Operator::real_diagonal(diag).map_err(|e| invalid(e.to_string()))?
        };
        Ok(op)
    }
}
