use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Evaluation(String),
    Empty(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Config(_) => 2,
            Failure::Evaluation(_) => 3,
            Failure::Empty(_) => 4,
        })
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Evaluation(m) => format!("evaluation error: {m}"),
            Failure::Empty(m) => format!("empty result: {m}"),
        }
    }
}

/// Errors raised while interpreting the config.
pub fn config<T>(r: tgeom::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Config(e.to_string()))
}

/// Errors raised by the computation itself.
pub fn eval<T>(r: tgeom::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        tgeom::Error::EmptySampleSet(m) => Failure::Empty(m),
        other => Failure::Evaluation(other.to_string()),
    })
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

/// A data file written next to the report.
pub struct Attachment {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub result: Value,
    pub attachments: Vec<Attachment>,
    /// Replaces the flattened CSV report when `--format csv` is chosen.
    pub csv: Option<Vec<u8>>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Self {
            result,
            attachments: Vec::new(),
            csv: None,
        }
    }
}

pub fn envelope(command: &str, config: &RunConfig, result: Value) -> Value {
    json!({
        "tool": { "name": "tgeom", "version": env!("CARGO_PKG_VERSION") },
        "command": command,
        "config": to_value(config),
        "result": result,
    })
}

fn number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::Number(n) => rows.push((prefix.into(), number(n))),
        Value::String(s) => rows.push((prefix.into(), s.clone())),
        Value::Bool(b) => rows.push((prefix.into(), b.to_string())),
        Value::Null => rows.push((prefix.into(), String::new())),
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// `key,value` rows with dotted keys; floats use 17 significant digits.
pub fn flat_csv(report: &Value) -> Vec<u8> {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{},{}", quote(&k), quote(&v));
    }
    out.into_bytes()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Evaluation(format!("writing {}: {e}", path.display())))
}

/// Emits the report to stdout, or into `dir` as `report.json`/`report.csv`
/// alongside the attachments.
pub fn emit(
    command: &str,
    config: &RunConfig,
    outcome: Outcome,
    dir: Option<&PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let report = envelope(command, config, outcome.result);
    let (name, body) = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("JSON values serialize");
            s.push('\n');
            ("report.json", s.into_bytes())
        }
        Format::Csv => ("report.csv", outcome.csv.unwrap_or_else(|| flat_csv(&report))),
    };
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Evaluation(format!("creating {}: {e}", dir.display())))?;
            write_file(&dir.join(name), &body)?;
            if format == Format::Csv {
                let mut s = serde_json::to_string_pretty(&report).expect("JSON values serialize");
                s.push('\n');
                write_file(&dir.join("report.json"), s.as_bytes())?;
            }
            for a in outcome.attachments {
                write_file(&dir.join(a.name), &a.bytes)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&body)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Evaluation(format!("writing stdout: {e}")))?;
        }
    }
    Ok(())
}
