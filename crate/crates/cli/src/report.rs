//! The JSON report printed by every subcommand.

use std::fmt;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Errors that stop a command before it can report results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Parse(String),
    Limit(String),
    Invalid(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Limit(_) => 4,
            Failure::Invalid(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Parse(_) => "parse",
            Failure::Limit(_) => "limit",
            Failure::Invalid(_) => "invalid_input",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Limit(m) | Failure::Invalid(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// argv without the program name
    pub command: Vec<String>,
    /// SHA-256 over the input files, each prefixed by its length
    pub inputs_digest: String,
    pub results: Value,
    pub status: Status,
    pub exit_code: i32,
    pub error: Option<ErrorInfo>,
}

/// Result of running one command: the results object and whether every check passed.
pub struct Outcome {
    pub results: Value,
    pub passed: bool,
}

pub fn digest(inputs: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(command: Vec<String>, inputs: &[Vec<u8>], outcome: Result<Outcome, Failure>) -> Self {
        let inputs_digest = digest(inputs);
        match outcome {
            Ok(o) => Report {
                command,
                inputs_digest,
                results: o.results,
                status: if o.passed { Status::Pass } else { Status::Fail },
                exit_code: if o.passed { 0 } else { 1 },
                error: None,
            },
            Err(e) => Report {
                command,
                inputs_digest,
                results: Value::Null,
                status: Status::Error,
                exit_code: e.exit_code(),
                error: Some(ErrorInfo { kind: e.kind(), message: e.message().to_string() }),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Short text form for `--pretty`.
    pub fn to_pretty(&self) -> String {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        let mut out = format!("qcap {}\nstatus: {status} (exit {})\n", self.command.join(" "), self.exit_code);
        if let Some(e) = &self.error {
            out += &format!("error: {} ({})\n", e.message, e.kind);
        }
        if let Value::Object(map) = &self.results {
            for (k, v) in map {
                out += &format!("{k}: {}\n", summarize(v));
            }
        }
        out += &format!("inputs: sha256 {}\n", self.inputs_digest);
        out
    }
}

fn summarize(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.len() <= 96 {
        return s;
    }
    match v {
        Value::Array(a) => format!("[{} entries]", a.len()),
        Value::Object(o) => format!("{{{}}}", o.keys().cloned().collect::<Vec<_>>().join(", ")),
        _ => format!("{}...", &s[..93]),
    }
}
