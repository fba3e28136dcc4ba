//! Report envelope and the single writer that puts artifacts on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anisowave_core::solver::SpectralField;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, EXIT_NON_CONVERGENCE, EXIT_PASS, EXIT_USAGE, EXIT_VERDICT};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NonConvergence,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::Fail => EXIT_VERDICT,
            Status::NonConvergence => EXIT_NON_CONVERGENCE,
            Status::Error => EXIT_USAGE,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "pass" => Some(Status::Pass),
            "fail" => Some(Status::Fail),
            "non-convergence" => Some(Status::NonConvergence),
            "error" => Some(Status::Error),
            _ => None,
        }
    }
}

pub enum Artifact {
    Text {
        name: String,
        contents: String,
    },
    Snapshot {
        name: String,
        field: Box<SpectralField>,
    },
}

pub struct Outcome {
    pub status: Status,
    pub failures: Vec<String>,
    pub result: Value,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Self {
            status: Status::Pass,
            failures: Vec::new(),
            result,
            artifacts: Vec::new(),
        }
    }

    /// Records a failure and raises the status to at least `status`.
    pub fn fail(&mut self, status: Status, message: String) {
        self.status = self.status.max(status);
        self.failures.push(message);
    }

    pub fn text(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact::Text {
            name: name.into(),
            contents,
        });
    }
}

pub fn envelope(
    command: &str,
    params: &Value,
    status: Status,
    failures: &[String],
    result: &Value,
) -> Value {
    json!({
        "command": command,
        "config": params,
        "status": status,
        "failures": failures,
        "result": result,
    })
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Serializes rows into CSV text.
pub fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::config(format!("csv encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::config(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Two whitespace-separated columns with a comment header.
pub fn plot_text(title: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut s = format!("# {title}\n# t value\n");
    for (x, y) in xs.iter().zip(ys) {
        s.push_str(&format!("{x:e} {y:e}\n"));
    }
    s
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes the report and every artifact under `out`.
pub fn write_all(
    out: &Path,
    report: &Value,
    artifacts: &[Artifact],
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for a in artifacts {
        match a {
            Artifact::Text { name, contents } => {
                let p = out.join(name);
                write(&p, contents.as_bytes())?;
                written.push(p);
            }
            Artifact::Snapshot { name, field } => {
                let (bin, side) = field.write_snapshot(&out.join(name))?;
                written.extend([bin, side]);
            }
        }
    }
    let p = out.join(REPORT_FILE);
    write(&p, to_pretty(report).as_bytes())?;
    written.push(p);
    Ok(written)
}
