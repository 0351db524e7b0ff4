use std::collections::BTreeMap;
use std::io::Write;

use bfx_core::quadrature::QuadResult;
use bfx_core::Estimate;
use serde::{Deserialize, Serialize};

use crate::cli::Format;
use crate::CliError;

/// One computed point, as written to standard output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, String>,
    /// Absent on rows whose computation failed.
    pub value: Option<f64>,
    /// Monte Carlo standard error or quadrature error estimate.
    pub error: Option<f64>,
    pub method: String,
    pub seed: u64,
    /// Only with `--timing`, so that default output is reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
    /// Error kind for failed sweep rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunRecord {
    pub fn new(command: &str, params: &[(&str, String)], seed: u64) -> Self {
        Self {
            command: command.to_string(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            value: None,
            error: None,
            method: String::new(),
            seed,
            wall_ms: None,
            extra: BTreeMap::new(),
            status: None,
            message: None,
        }
    }

    pub fn with_estimate(mut self, e: &Estimate) -> Self {
        self.value = Some(e.value);
        self.error = Some(e.std_error);
        self.method = e.method.clone();
        if e.is_mc() {
            self.extra
                .insert("n_effective".into(), e.n_effective as f64);
        }
        self
    }

    pub fn with_quad(mut self, q: &QuadResult, method: &str) -> Self {
        self.value = Some(q.value);
        self.error = Some(q.err_estimate);
        self.method = method.to_string();
        self
    }

    pub fn with_value(mut self, v: f64, err: f64, method: &str) -> Self {
        self.value = Some(v);
        self.error = Some(err);
        self.method = method.to_string();
        self
    }

    pub fn with_extra(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.to_string(), v);
        self
    }
}

const CSV_HEADER: [&str; 10] = [
    "command", "params", "value", "error", "method", "seed", "wall_ms", "extra", "status",
    "message",
];

fn join_map<V>(m: &BTreeMap<String, V>, f: impl Fn(&V) -> String) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}={}", f(v)))
        .collect::<Vec<_>>()
        .join(";")
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

// Debug keeps the shortest round-trip digits but switches to exponent form
// for very small or large magnitudes.
fn opt_f64(v: &Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Writes records as JSON lines or as CSV with a header row.
pub fn write_records<W: Write>(
    out: W,
    records: &[RunRecord],
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out).map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)
                .map_err(|e| CliError::Io(e.to_string()))?;
            for r in records {
                w.write_record([
                    r.command.clone(),
                    join_map(&r.params, |v| v.clone()),
                    opt_f64(&r.value),
                    opt_f64(&r.error),
                    r.method.clone(),
                    r.seed.to_string(),
                    opt(&r.wall_ms),
                    join_map(&r.extra, |v| format!("{v:?}")),
                    opt(&r.status),
                    opt(&r.message),
                ])
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
