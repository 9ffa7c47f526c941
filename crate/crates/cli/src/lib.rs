//! `entctl`: instance files in, exact entropy reports out.

pub mod build;
pub mod report;
pub mod run;
pub mod schema;

use std::fmt;
use std::path::Path;

use entropy_core::Error;

pub use build::{build, Model, Side};
pub use report::{emit_report, Format, Report, Status};
pub use run::{run_command, Command, Options};
pub use schema::{Instance, Kind, SCHEMA};

/// Process exit status for each outcome class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitClass {
    Success,
    /// A verified invariant failed or an internal identity broke.
    Internal,
    Inconclusive,
    Validation,
    Hypothesis,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Success => 0,
            ExitClass::Internal => 1,
            ExitClass::Inconclusive => 2,
            ExitClass::Validation => 3,
            ExitClass::Hypothesis => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Validation,
            message: message.into(),
        }
    }

    pub fn from_core(e: Error) -> Self {
        let class = match e {
            Error::Inconclusive { .. } => ExitClass::Inconclusive,
            Error::Hypothesis(_) | Error::NotSurjective(_) | Error::NotInvertible(_) => ExitClass::Hypothesis,
            Error::Consistency(_) => ExitClass::Internal,
            _ => ExitClass::Validation,
        };
        CliError {
            class,
            message: e.to_string(),
        }
    }

    pub fn context(mut self, at: impl fmt::Display) -> Self {
        self.message = format!("{at}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Reads an instance from JSON text; errors name the offending field and
/// its line and column.
pub fn parse_instance_str(text: &str) -> Result<Instance, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::validation(format!(
            "schema violation at `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })
}

pub fn parse_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let inst = parse_instance_str(&text)?;
    build(&inst)?;
    Ok(inst)
}

/// Canonical JSON for an instance (pretty, stable key order).
pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instances always serialize")
}
