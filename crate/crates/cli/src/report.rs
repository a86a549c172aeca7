//! Machine-readable run reports in JSON and CSV.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};

/// One labelled quantity. `value` is a JSON number, bool, string, array or
/// `null` (non-finite numbers serialize as `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub quantity: String,
    pub value: Value,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: Command,
    /// The effective config: defaults filled, overrides applied, files inlined.
    pub inputs: RunConfig,
    pub outputs: Vec<Output>,
    /// Quantities skipped because their formula does not apply to the inputs.
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

pub const CSV_HEADER: [&str; 3] = ["quantity", "value", "formula"];

impl Report {
    pub fn get(&self, quantity: &str) -> Option<&Value> {
        self.outputs.iter().find(|o| o.quantity == quantity).map(|o| &o.value)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> CliResult<Report> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("report: {e}")))
    }

    /// One row per output, then one `note` row per note, then `wall_time_s`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut row = |q: &str, v: &str, f: &str| w.write_record([q, v, f]).expect("write to memory");
        row(CSV_HEADER[0], CSV_HEADER[1], CSV_HEADER[2]);
        for o in &self.outputs {
            row(&o.quantity, &csv_value(&o.value), &o.formula);
        }
        for n in &self.notes {
            row("note", n, "");
        }
        row("wall_time_s", &Value::from(self.wall_time_s).to_string(), "elapsed wall-clock seconds");
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
    }
}

/// Strings are written raw; everything else as its JSON text.
fn csv_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Reads a CSV report back into `(quantity, value, formula)` rows, checking
/// the header. Values that parse as JSON are returned as such, others as strings.
pub fn parse_csv(text: &str) -> CliResult<Vec<Output>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| CliError::Parse(format!("csv: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Parse(format!("csv: unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::Parse(format!("csv: {e}")))?;
            let raw = &rec[1];
            let value = match serde_json::from_str::<Value>(raw) {
                Ok(v) if !v.is_string() => v,
                _ => Value::String(raw.to_string()),
            };
            Ok(Output { quantity: rec[0].to_string(), value, formula: rec[2].to_string() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let inputs: RunConfig = serde_json::from_str(r#"{"command": "stats", "sigma": [1, 1]}"#).unwrap();
        Report {
            command: Command::Stats,
            inputs,
            outputs: vec![
                Output { quantity: "D".into(), value: Value::from(1.5), formula: "Σ ln(1 + σ_i²)".into() },
                Output { quantity: "kept".into(), value: serde_json::json!([0, 2]), formula: "a, b".into() },
                Output { quantity: "notion".into(), value: Value::from("exact"), formula: String::new() },
                Output { quantity: "bad".into(), value: Value::from(f64::NAN), formula: String::new() },
            ],
            notes: vec!["skipped x".into()],
            wall_time_s: 0.25,
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get("bad"), Some(&Value::Null));
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let rows = parse_csv(&r.to_csv()).unwrap();
        assert_eq!(rows.len(), r.outputs.len() + 2);
        assert_eq!(&rows[..4], &r.outputs[..]);
        assert_eq!(rows[4].value, Value::from("skipped x"));
        assert_eq!(rows[5].value, Value::from(0.25));
        assert!(parse_csv("a,b,c\n").is_err());
    }
}
