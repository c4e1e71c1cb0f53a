use std::fmt;
use std::path::Path;

use lisa_core::dsl::{Diagnostic, Severity};
use lisa_core::prism::PrismError;
use serde_json::json;

/// Exit code 1: the input is malformed. Exit code 2: it could not be processed.
#[derive(Debug)]
pub enum CliError {
    Input(Vec<serde_json::Value>),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    /// JSON objects for the error stream, one per line.
    pub fn objects(&self) -> Vec<serde_json::Value> {
        match self {
            CliError::Input(v) => v.clone(),
            CliError::Runtime(m) => vec![json!({ "kind": "runtime", "message": m })],
        }
    }

    pub fn input(file: Option<&Path>, message: impl fmt::Display) -> Self {
        CliError::Input(vec![object(file, None, "error", &message.to_string())])
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        CliError::Runtime(message.to_string())
    }

    pub fn diagnostics(file: &Path, diags: &[Diagnostic]) -> Self {
        CliError::Input(diags.iter().filter(|d| d.severity == Severity::Error).map(|d| diagnostic(file, d)).collect())
    }

    pub fn prism(file: Option<&Path>, e: &PrismError) -> Self {
        CliError::Input(vec![object(file, e.location, "error", &e.message)])
    }
}

fn object(file: Option<&Path>, loc: Option<(usize, usize)>, severity: &str, message: &str) -> serde_json::Value {
    let mut o = json!({ "kind": "diagnostic", "severity": severity, "message": message });
    if let Some(f) = file {
        o["file"] = json!(f.display().to_string());
    }
    if let Some((l, c)) = loc {
        o["line"] = json!(l);
        o["column"] = json!(c);
    }
    o
}

pub fn diagnostic(file: &Path, d: &Diagnostic) -> serde_json::Value {
    let sev = match d.severity {
        Severity::Error => "error",
        Severity::Warning => "warning",
    };
    object(Some(file), Some((d.location.line, d.location.column)), sev, &d.message)
}
