use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observable sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Free-form provenance (model, shots, seeds, mitigation).
    pub metadata: BTreeMap<String, String>,
}

pub const CSV_COLUMNS: &str = "t,value,std_error";

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, std_errors: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() != std_errors.len() {
            return Err(Error::InvalidParameter(format!(
                "series columns differ in length ({}, {}, {})",
                times.len(),
                values.len(),
                std_errors.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("series times must be strictly increasing".into()));
        }
        Ok(Self { times, values, std_errors, metadata: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// `# key: value` header lines, then `t,value,std_error` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for line in v.lines() {
                let _ = writeln!(out, "# {k}: {line}");
            }
        }
        out.push_str(CSV_COLUMNS);
        out.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(out, "{},{},{}", self.times[i], self.values[i], self.std_errors[i]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let (mut times, mut values, mut errors) = (Vec::new(), Vec::new(), Vec::new());
        let mut seen_columns = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    let entry: &mut String = metadata.entry(k.trim().to_string()).or_default();
                    if !entry.is_empty() {
                        entry.push('\n');
                    }
                    entry.push_str(v.trim());
                }
                continue;
            }
            if !seen_columns {
                if line != CSV_COLUMNS {
                    return Err(Error::Parse { line: line_no, message: format!("expected header {CSV_COLUMNS:?}") });
                }
                seen_columns = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse { line: line_no, message: format!("expected 3 fields, got {}", fields.len()) });
            }
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse { line: line_no, message: format!("{s:?}: {e}") })
            };
            times.push(parse(fields[0])?);
            values.push(parse(fields[1])?);
            errors.push(parse(fields[2])?);
        }
        if !seen_columns {
            return Err(Error::Parse { line: 0, message: "missing column header".into() });
        }
        let mut ts = Self::new(times, values, errors)?;
        ts.metadata = metadata;
        Ok(ts)
    }
}
