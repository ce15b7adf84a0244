//! Result rows and their CSV / JSON-lines emission.

use crate::error::{Error, Result};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::io::Write;

/// One emitted measurement.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRow {
    pub trial: usize,
    pub method: String,
    pub hyperparams: String,
    pub metric: String,
    /// NaN marks a failed trial/method combination.
    pub value: f64,
    pub runtime_ms: u64,
}

impl Serialize for ResultRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ResultRow", 6)?;
        s.serialize_field("trial", &self.trial)?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("hyperparams", &self.hyperparams)?;
        s.serialize_field("metric", &self.metric)?;
        // JSON has no NaN; failed rows carry null.
        if self.value.is_finite() {
            s.serialize_field("value", &self.value)?;
        } else {
            s.serialize_field("value", &Option::<f64>::None)?;
        }
        s.serialize_field("runtime_ms", &self.runtime_ms)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmitFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "jsonl" => Ok(EmitFormat::Jsonl),
            other => Err(Error::Config(format!(
                "unknown format {other:?}, expected csv or jsonl"
            ))),
        }
    }
}

/// Sorts rows into the canonical emission order.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (a.trial, &a.method, &a.metric, &a.hyperparams)
            .cmp(&(b.trial, &b.method, &b.metric, &b.hyperparams))
    });
}

/// Writes rows in the requested format. Output is byte-deterministic
/// for identical rows.
pub fn emit<W: Write>(out: &mut W, rows: &[ResultRow], format: EmitFormat) -> Result<()> {
    match format {
        EmitFormat::Csv => {
            let mut writer = csv::Writer::from_writer(vec![]);
            writer
                .write_record(["trial", "method", "hyperparams", "metric", "value", "runtime_ms"])
                .map_err(|e| Error::Io(format!("writing csv header: {e}")))?;
            for row in rows {
                writer
                    .write_record(&[
                        row.trial.to_string(),
                        row.method.clone(),
                        row.hyperparams.clone(),
                        row.metric.clone(),
                        format_value(row.value),
                        row.runtime_ms.to_string(),
                    ])
                    .map_err(|e| Error::Io(format!("writing csv row: {e}")))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::Io(format!("flushing csv: {e}")))?;
            out.write_all(&bytes)
                .map_err(|e| Error::Io(format!("writing csv: {e}")))?;
        }
        EmitFormat::Jsonl => {
            for row in rows {
                let line = serde_json::to_string(row)
                    .map_err(|e| Error::Io(format!("serializing row: {e}")))?;
                writeln!(out, "{line}").map_err(|e| Error::Io(format!("writing row: {e}")))?;
            }
        }
    }
    Ok(())
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        // Shortest round-trip representation; stable across runs.
        format!("{v}")
    } else {
        "NaN".into()
    }
}

/// Writes rows to a file, creating parent directories as needed.
pub fn emit_to_file(path: &str, rows: &[ResultRow], format: EmitFormat) -> Result<()> {
    if let Some(parent) = std::path::Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    let file =
        std::fs::File::create(path).map_err(|e| Error::Io(format!("creating {path}: {e}")))?;
    let mut writer = std::io::BufWriter::new(file);
    emit(&mut writer, rows, format)
}

/// Parses rows back from CSV (used by tests and downstream tooling).
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Io(format!("parsing csv: {e}")))?;
        if record.len() != 6 {
            return Err(Error::Io(format!(
                "csv row has {} fields, expected 6",
                record.len()
            )));
        }
        let parse_f64 = |s: &str| -> f64 {
            if s == "NaN" {
                f64::NAN
            } else {
                s.parse().unwrap_or(f64::NAN)
            }
        };
        rows.push(ResultRow {
            trial: record[0].parse().map_err(|e| Error::Io(format!("bad trial: {e}")))?,
            method: record[1].into(),
            hyperparams: record[2].into(),
            metric: record[3].into(),
            value: parse_f64(&record[4]),
            runtime_ms: record[5]
                .parse()
                .map_err(|e| Error::Io(format!("bad runtime: {e}")))?,
        });
    }
    Ok(rows)
}
