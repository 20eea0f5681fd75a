//! Report envelope and renderers.

use serde::Serialize;
use serde_json::Value;

use crate::commands::CliError;
use crate::{Cli, Format};

/// Verdict class of a finished command, mapped to the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Computation finished and the tested property holds (or none was tested).
    Ok,
    /// The tested property was refuted or could not be established.
    Refuted,
}

impl Status {
    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Status::Ok
        } else {
            Status::Refuted
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Refuted => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    /// File path, `-`, or `preset:<name>`.
    pub source: String,
    pub n: usize,
    pub levels: usize,
    /// SHA-256 of the canonical chain file text.
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub args: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputInfo>,
    pub status: Status,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

/// A finished command: the serializable report plus preformatted text views.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub human: String,
    /// Header plus rows; absent when the command has no natural table.
    pub tsv: Option<Vec<Vec<String>>>,
}

pub fn render(format: Format, outcome: &Outcome) -> String {
    let r = &outcome.report;
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Human => {
            let mut s = String::new();
            if let Some(input) = &r.input {
                s.push_str(&format!(
                    "input: {} (n={}, L={}, sha256 {})\n",
                    input.source,
                    input.n,
                    input.levels,
                    &input.sha256[..16]
                ));
            }
            s.push_str(&outcome.human);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            if let Some(ms) = r.runtime_ms {
                s.push_str(&format!("runtime: {ms:.3} ms\n"));
            }
            s
        }
        Format::Tsv => {
            let rows = outcome.tsv.clone().unwrap_or_else(|| {
                let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
                flatten("", &r.result, &mut rows);
                rows
            });
            rows.iter().map(|row| row.join("\t") + "\n").collect()
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, rows);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, rows);
            }
        }
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

pub fn render_error(cli: &Cli, err: &CliError) -> String {
    match cli.global.format {
        Format::Json => {
            let body = ErrorReport {
                command: cli.command.name(),
                error: ErrorBody {
                    kind: err.kind(),
                    message: err.to_string(),
                },
            };
            serde_json::to_string_pretty(&body).expect("errors serialize") + "\n"
        }
        _ => String::new(),
    }
}
