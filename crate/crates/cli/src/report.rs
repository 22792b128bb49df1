use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Exit codes: 2 flag validation, 3 domain error, 4 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(dualrail::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Domain(e) => write!(f, "domain error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<dualrail::Error> for CliError {
    fn from(e: dualrail::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Machine-readable result of one CLI run. Contains no timing information,
/// so equal parameters and seed give byte-identical output.
#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Value,
}

impl ExperimentReport {
    pub fn new(
        command: &str,
        parameters: impl Serialize,
        seed: Option<u64>,
        results: impl Serialize,
    ) -> Self {
        Self {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).expect("serializable parameters"),
            seed,
            results: serde_json::to_value(results).expect("serializable results"),
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("serializable report");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut rows = vec![("command".to_string(), self.command.clone())];
                if let (Some(seed), None) = (self.seed, self.results.get("seed")) {
                    rows.push(("seed".into(), seed.to_string()));
                }
                flatten("", &self.results, &mut rows);
                let mut s = String::from("key,value\n");
                for (k, v) in rows {
                    s.push_str(&format!("{k},{v}\n"));
                }
                s
            }
        }
    }

    pub fn emit(&self, format: OutputFormat, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

/// Scalar leaves as dotted keys; matrices (arrays of arrays) are skipped.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, rows);
            }
        }
        Value::Array(items) => {
            if items.iter().any(Value::is_array) {
                return;
            }
            for (i, child) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), child, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
