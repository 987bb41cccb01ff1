//! Scenario runner behind the `qretro` binary.
//!
//! Exit codes: parse error 2, validation error 3, computation error 4,
//! I/O error 1.

mod compute;
pub mod document;
pub mod scenario;

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use compute::evaluate;
pub use document::{ResultDocument, Table, TableKind};
pub use scenario::{parse_scenario, Scenario, ScenarioKind, SCHEMA_VERSION};

/// JSON schema for scenario files, versioned with [`SCHEMA_VERSION`].
pub const SCENARIO_SCHEMA: &str = include_str!("../../schema/scenario.schema.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("computation error: {0}")]
    Computation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Computation(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Computation(_) => "computation",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Parse(m) | CliError::Validation(m) | CliError::Computation(m) => m,
        }
    }

    /// One-line JSON report for stderr.
    pub fn report(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            exit_code: i32,
            message: &'a str,
        }
        let r = Report { error: self.category(), exit_code: self.exit_code(), message: self.message() };
        serde_json::to_string(&r).unwrap_or_else(|_| self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Parses, evaluates and renders one scenario document.
pub fn run_str(text: &str, format: OutputFormat) -> Result<String, CliError> {
    let scenario = parse_scenario(text)?;
    let doc = evaluate(&scenario)?;
    match format {
        OutputFormat::Json => doc.to_json(),
        OutputFormat::Csv => doc.to_csv(),
    }
}

pub fn run_file(path: &Path, format: OutputFormat) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    run_str(&text, format)
}

/// A bundled scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! examples {
    ($($name:literal),* $(,)?) => {
        &[$(Example { name: $name, text: include_str!(concat!("../../scenarios/", $name, ".json")) }),*]
    };
}

pub const EXAMPLES: &[Example] = examples![
    "bus-train",
    "horse-race",
    "retrodict-bb84",
    "retrodict-biased-qubit",
    "retrodict-subset",
    "detector-eta-half",
    "detector-perfect",
    "synthesis-one-count",
    "synthesis-vacuum",
    "scissors",
    "bb84-tables",
    "bb84-monte-carlo",
    "bb84-intercept-resend",
];

pub fn example(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

/// `name  kind  description` lines for every bundled scenario.
pub fn list_examples() -> String {
    let mut out = String::new();
    for e in EXAMPLES {
        let (kind, desc) = match parse_scenario(e.text) {
            Ok(s) => (s.kind.name(), s.description.unwrap_or_default()),
            Err(_) => ("?", String::new()),
        };
        out.push_str(&format!("{:<24} {:<10} {}\n", e.name, kind, desc));
    }
    out
}
