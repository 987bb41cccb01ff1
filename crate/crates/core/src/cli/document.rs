//! Result documents and their JSON / CSV renderings.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::CliError;
use crate::bayes::{ConditionalTable, Distribution, JointDistribution};
use crate::bb84::SlotRecord;
use crate::hilbert::Operator;

/// Row sums and totals must hit 1 within this before a table is emitted.
pub const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Each row is a distribution over the columns.
    Conditional,
    /// All entries together form one distribution.
    Joint,
    /// Single row holding one distribution.
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub kind: TableKind,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub fn conditional(name: &str, t: &ConditionalTable) -> Self {
        Self {
            name: name.to_owned(),
            kind: TableKind::Conditional,
            row_labels: t.row_labels().to_vec(),
            col_labels: t.col_labels().to_vec(),
            values: t.rows().to_vec(),
        }
    }

    pub fn joint(name: &str, j: &JointDistribution) -> Self {
        Self {
            name: name.to_owned(),
            kind: TableKind::Joint,
            row_labels: j.row_labels.clone(),
            col_labels: j.col_labels.clone(),
            values: j.values.clone(),
        }
    }

    pub fn distribution(name: &str, row: &str, d: &Distribution) -> Self {
        Self {
            name: name.to_owned(),
            kind: TableKind::Distribution,
            row_labels: vec![row.to_owned()],
            col_labels: d.labels.clone(),
            values: vec![d.probs.clone()],
        }
    }

    /// Checks that the table is a proper set of distributions.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |what: String, sum: f64| {
            Err(CliError::Computation(format!("table `{}`: {what} sums to {sum}, not 1", self.name)))
        };
        match self.kind {
            TableKind::Conditional | TableKind::Distribution => {
                for (label, row) in self.row_labels.iter().zip(&self.values) {
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > TABLE_TOL {
                        return bad(format!("row `{label}`"), sum);
                    }
                }
            }
            TableKind::Joint => {
                let sum: f64 = self.values.iter().flatten().sum();
                if (sum - 1.0).abs() > TABLE_TOL {
                    return bad("joint distribution".into(), sum);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedOperator {
    pub name: String,
    pub dims: Vec<usize>,
    /// Row-major `[re, im]` entries.
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl NamedOperator {
    pub fn new(name: &str, op: &Operator) -> Self {
        Self {
            name: name.to_owned(),
            dims: op.dims().dims().to_vec(),
            entries: op.to_rows().iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub operators: Vec<NamedOperator>,
    pub values: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<SlotRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub schema_version: u64,
    pub kind: String,
    pub scenario: Value,
    pub outputs: Outputs,
    pub diagnostics: BTreeMap<String, Value>,
}

impl ResultDocument {
    pub fn new(kind: &str, scenario: Value) -> Self {
        Self {
            schema_version: super::scenario::SCHEMA_VERSION,
            kind: kind.to_owned(),
            scenario,
            outputs: Outputs::default(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn table(&mut self, t: Table) {
        self.outputs.tables.push(t);
    }

    pub fn operator(&mut self, name: &str, op: &Operator) {
        self.outputs.operators.push(NamedOperator::new(name, op));
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.outputs.values.insert(name.to_owned(), v);
    }

    pub fn series(&mut self, name: &str, v: Vec<f64>) {
        self.outputs.series.insert(name.to_owned(), v);
    }

    pub fn diagnostic(&mut self, name: &str, v: impl Into<Value>) {
        self.diagnostics.insert(name.to_owned(), v.into());
    }

    /// Validates every table; called before any rendering.
    pub fn check(&self) -> Result<(), CliError> {
        self.outputs.tables.iter().try_for_each(Table::check)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Computation(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Flat `table,row,column,value` rows; operators and records are JSON-only.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Computation(e.to_string());
        w.write_record(["table", "row", "column", "value"]).map_err(io)?;
        for t in &self.outputs.tables {
            for (row, values) in t.row_labels.iter().zip(&t.values) {
                for (col, v) in t.col_labels.iter().zip(values) {
                    w.write_record([t.name.as_str(), row, col, &v.to_string()]).map_err(io)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Computation(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Computation(e.to_string()))
    }
}
