use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use modframe::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A curve for CSV output.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

pub struct Report {
    pub command: &'static str,
    pub theorem: &'static str,
    pub body: Map<String, Value>,
    pub table: Option<Table>,
    /// Set when a check inside the report did not hold.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, theorem: &'static str) -> Self {
        Report {
            command,
            theorem,
            body: Map::new(),
            table: None,
            failure: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.body.insert(key.to_string(), value.into());
        self
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = Map::new();
                out.insert("command".into(), json!(self.command));
                out.insert("theorem".into(), json!(self.theorem));
                out.insert("verified".into(), json!(self.failure.is_none()));
                if let Some(f) = &self.failure {
                    out.insert("failure".into(), json!(f));
                }
                out.extend(self.body.clone());
                if let Some(t) = &self.table {
                    let rows: Vec<Value> = t
                        .rows
                        .iter()
                        .map(|r| {
                            let obj: Map<String, Value> = t
                                .header
                                .iter()
                                .zip(r)
                                .map(|(h, &v)| (h.to_string(), modframe::io::json_f64(v)))
                                .collect();
                            Value::Object(obj)
                        })
                        .collect();
                    out.insert("curve".into(), Value::Array(rows));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(out))
                    .expect("report is valid JSON");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                match &self.table {
                    Some(t) => {
                        s.push_str(&t.header.join(","));
                        s.push('\n');
                        for r in &t.rows {
                            let cells: Vec<String> = r.iter().map(|&v| number(v)).collect();
                            s.push_str(&cells.join(","));
                            s.push('\n');
                        }
                    }
                    None => {
                        s.push_str("key,value\n");
                        for (k, v) in self.scalars() {
                            let _ = writeln!(s, "{k},{}", csv_escape(&v));
                        }
                    }
                }
                s
            }
            Format::Text => {
                let mut s = format!("{}\n", self.theorem);
                let _ = writeln!(s, "verified = {}", self.failure.is_none());
                if let Some(f) = &self.failure {
                    let _ = writeln!(s, "failure = {f}");
                }
                for (k, v) in self.scalars() {
                    let _ = writeln!(s, "{k} = {v}");
                }
                if let Some(t) = &self.table {
                    let _ = writeln!(s, "{}", t.header.join("\t"));
                    for r in &t.rows {
                        let cells: Vec<String> = r.iter().map(|&v| number(v)).collect();
                        let _ = writeln!(s, "{}", cells.join("\t"));
                    }
                }
                s
            }
        }
    }

    /// Scalar leaves of the body with dotted keys; matrices and algebra
    /// elements are left to the JSON format.
    fn scalars(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (k, v) in &self.body {
            flatten(k, v, &mut out);
        }
        out
    }
}

fn is_bulk(obj: &Map<String, Value>) -> bool {
    [
        "data", "blocks", "entries", "elements", "vectors", "gram", "b",
    ]
    .iter()
    .any(|k| obj.contains_key(*k))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(obj) if is_bulk(obj) => {}
        Value::Object(obj) => {
            for (k, inner) in obj {
                flatten(&format!("{prefix}.{k}"), inner, out);
            }
        }
        Value::Array(items) => {
            if items.iter().all(|x| x.is_number() || x.is_string()) {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                out.push((prefix.to_string(), parts.join(";")));
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => number(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        modframe::io::json_f64(x)
            .as_str()
            .unwrap_or("nan")
            .to_string()
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Why a run stopped.
#[derive(Debug)]
pub enum CliError {
    FileNotFound(String),
    Io(String),
    Parse(String),
    Verification { kind: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification { .. } => 2,
            _ => 1,
        }
    }

    /// One-line machine-readable record.
    pub fn record(&self) -> String {
        let v = match self {
            CliError::FileNotFound(m) => json!({"error": "FileNotFound", "message": m}),
            CliError::Io(m) => json!({"error": "IoError", "message": m}),
            CliError::Parse(m) => json!({"error": "ParseError", "message": m}),
            CliError::Verification { kind, message } => {
                json!({"error": "VerificationFailed", "kind": kind, "message": message})
            }
        };
        v.to_string()
    }

    /// Library failure while loading input.
    pub fn input(e: Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Verification {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}
