//! Classical Bayes calculus over finite event sets.
//!
//! Besides being a calculator in its own right, this module is the classical
//! oracle that the quantum pathways in [`crate::retrodict`] are checked
//! against: build the joint distribution from predictive conditionals, then
//! read retrodictive conditionals off its normalized columns.

use thiserror::Error;

/// Tolerance for row sums and prior sums when validating inputs.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("no events given")]
    Empty,
    #[error("{what}: expected {expected} entries, got {got}")]
    Length { what: String, expected: usize, got: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("probability for `{label}` is {value}, outside [0, 1]")]
    OutOfRange { label: String, value: f64 },
    #[error("priors sum to {0}, not 1")]
    PriorsNotNormalized(f64),
    #[error("row `{row}` sums to {sum}, not 1")]
    RowNotNormalized { row: String, sum: f64 },
    #[error("conditioning labels {table:?} do not match prior labels {priors:?}")]
    LabelMismatch { priors: Vec<String>, table: Vec<String> },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("outcome `{0}` has zero probability; the posterior is undefined")]
    ZeroProbabilityOutcome(String),
}

fn check_unique(labels: &[String]) -> Result<(), BayesError> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(BayesError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_probability(label: &str, value: f64) -> Result<(), BayesError> {
    if !value.is_finite() || !(0.0..=1.0 + PROBABILITY_TOL).contains(&value) {
        return Err(BayesError::OutOfRange { label: label.to_owned(), value });
    }
    Ok(())
}

/// Labelled probability distribution over a finite set of events.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Events `a_i` with their prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpace {
    labels: Vec<String>,
    priors: Vec<f64>,
}

impl EventSpace {
    pub fn new(labels: Vec<String>, priors: Vec<f64>) -> Result<Self, BayesError> {
        if labels.is_empty() {
            return Err(BayesError::Empty);
        }
        if priors.len() != labels.len() {
            return Err(BayesError::Length { what: "priors".into(), expected: labels.len(), got: priors.len() });
        }
        check_unique(&labels)?;
        for (l, &p) in labels.iter().zip(&priors) {
            check_probability(l, p)?;
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(BayesError::PriorsNotNormalized(sum));
        }
        Ok(Self { labels, priors })
    }

    /// Equal priors over `labels`.
    pub fn uniform(labels: Vec<String>) -> Result<Self, BayesError> {
        let n = labels.len().max(1) as f64;
        let priors = vec![1.0 / n; labels.len()];
        Self::new(labels, priors)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Conditional probabilities `P(column | row)`; every row is a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ConditionalTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, BayesError> {
        if row_labels.is_empty() || col_labels.is_empty() {
            return Err(BayesError::Empty);
        }
        check_unique(&row_labels)?;
        check_unique(&col_labels)?;
        if rows.len() != row_labels.len() {
            return Err(BayesError::Length { what: "table rows".into(), expected: row_labels.len(), got: rows.len() });
        }
        for (label, row) in row_labels.iter().zip(&rows) {
            if row.len() != col_labels.len() {
                return Err(BayesError::Length {
                    what: format!("row `{label}`"),
                    expected: col_labels.len(),
                    got: row.len(),
                });
            }
            for &p in row {
                check_probability(label, p)?;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROBABILITY_TOL {
                return Err(BayesError::RowNotNormalized { row: label.clone(), sum });
            }
        }
        Ok(Self { row_labels, col_labels, rows })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.col_labels.iter().position(|l| l == col)?;
        Some(self.rows[r][c])
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.row_labels.iter().position(|l| l == label).map(|r| self.rows[r].as_slice())
    }
}

/// Joint probabilities `P(a_i, b_j)`, rows indexed by `a`, columns by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    /// Row marginal `P(a_i)`.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    /// Column marginal `P(b_j)`.
    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.col_labels.len()).map(|j| self.values.iter().map(|r| r[j]).sum()).collect()
    }

    /// `P(a | b_j)` read off column `j` of the joint.
    pub fn column_posterior(&self, col: &str) -> Result<Distribution, BayesError> {
        let j =
            self.col_labels.iter().position(|l| l == col).ok_or_else(|| BayesError::UnknownLabel(col.to_owned()))?;
        let norm: f64 = self.values.iter().map(|r| r[j]).sum();
        if norm <= 0.0 {
            return Err(BayesError::ZeroProbabilityOutcome(col.to_owned()));
        }
        Ok(Distribution { labels: self.row_labels.clone(), probs: self.values.iter().map(|r| r[j] / norm).collect() })
    }
}

fn check_match(priors: &EventSpace, cond: &ConditionalTable) -> Result<(), BayesError> {
    if priors.labels != cond.row_labels {
        return Err(BayesError::LabelMismatch { priors: priors.labels.clone(), table: cond.row_labels.clone() });
    }
    Ok(())
}

/// `P(a_i, b_j) = P(b_j | a_i) P(a_i)`.
pub fn joint(priors: &EventSpace, cond: &ConditionalTable) -> Result<JointDistribution, BayesError> {
    check_match(priors, cond)?;
    let values = cond.rows.iter().zip(&priors.priors).map(|(row, &p)| row.iter().map(|&c| c * p).collect()).collect();
    Ok(JointDistribution { row_labels: priors.labels.clone(), col_labels: cond.col_labels.clone(), values })
}

/// `P(b_j) = Σ_i P(b_j | a_i) P(a_i)`.
pub fn predict_marginal(priors: &EventSpace, cond: &ConditionalTable) -> Result<Distribution, BayesError> {
    check_match(priors, cond)?;
    let probs = (0..cond.col_labels.len())
        .map(|j| cond.rows.iter().zip(&priors.priors).map(|(row, &p)| row[j] * p).sum())
        .collect();
    Ok(Distribution { labels: cond.col_labels.clone(), probs })
}

/// Posterior `P(a_i | b_j)` for an observed outcome `b_j`.
pub fn retrodict_conditional(
    priors: &EventSpace,
    cond: &ConditionalTable,
    outcome: &str,
) -> Result<Distribution, BayesError> {
    check_match(priors, cond)?;
    let j = cond
        .col_labels
        .iter()
        .position(|l| l == outcome)
        .ok_or_else(|| BayesError::UnknownLabel(outcome.to_owned()))?;
    let weights: Vec<f64> = cond.rows.iter().zip(&priors.priors).map(|(row, &p)| row[j] * p).collect();
    let evidence: f64 = weights.iter().sum();
    if evidence <= 0.0 {
        return Err(BayesError::ZeroProbabilityOutcome(outcome.to_owned()));
    }
    Ok(Distribution { labels: priors.labels.clone(), probs: weights.iter().map(|w| w / evidence).collect() })
}

/// Full retrodictive table: rows are outcomes `b_j`, columns events `a_i`.
///
/// Fails if any outcome has zero probability.
pub fn retrodictive_table(priors: &EventSpace, cond: &ConditionalTable) -> Result<ConditionalTable, BayesError> {
    let rows = cond
        .col_labels
        .iter()
        .map(|b| retrodict_conditional(priors, cond, b).map(|d| d.probs))
        .collect::<Result<Vec<_>, _>>()?;
    ConditionalTable::new(cond.col_labels.clone(), priors.labels.clone(), rows)
}
