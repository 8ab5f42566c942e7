//! Byte-stable result export: CSV tables of numeric records and JSON
//! summaries. Floats are rounded to 12 significant digits before
//! serialization so that identical inputs always produce identical bytes;
//! non-finite values are rejected up front.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::{Error, Result};

/// Canonical float formatting: 12 significant digits, scientific, decimal
/// dot. Round-trips through `str::parse::<f64>()`.
pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Reject non-finite values and round to the canonical 12 significant
/// digits, so numbers survive a write/parse cycle unchanged.
pub fn canonical_float(v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::InvalidData(format!(
            "non-finite value {v} cannot be exported"
        )));
    }
    format_float(v)
        .parse::<f64>()
        .map_err(|e| Error::InvalidData(e.to_string()))
}

/// Homogeneous numeric records with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidData("table needs at least one column".into()));
        }
        if columns
            .iter()
            .any(|c| c.is_empty() || c.contains(',') || c.contains('\n'))
        {
            return Err(Error::InvalidData(
                "column names must be nonempty and free of separators".into(),
            ));
        }
        Ok(Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidData(format!(
                "row has {} fields, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        let row = row
            .iter()
            .map(|&v| canonical_float(v))
            .collect::<Result<Vec<f64>>>()?;
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Table> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty CSV".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        let mut table = Table::new(&columns)?;
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::InvalidData(format!("bad CSV field {f:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table.push(&row)?;
        }
        Ok(table)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(Error::Io)
    }
}

/// Validate a JSON summary for export: every number must be finite, and is
/// rounded to the canonical precision. `serde_json`'s map is ordered by
/// key, so serialization is byte-stable.
pub fn canonical_json(value: &Value) -> Result<Value> {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                let c = canonical_float(f)?;
                Ok(serde_json::json!(c))
            } else {
                Ok(value.clone())
            }
        }
        Value::Array(items) => Ok(Value::Array(
            items.iter().map(canonical_json).collect::<Result<Vec<_>>>()?,
        )),
        Value::Object(map) => {
            let mut out = serde_json::Map::new();
            for (k, v) in map {
                out.insert(k.clone(), canonical_json(v)?);
            }
            Ok(Value::Object(out))
        }
        Value::Null => Err(Error::InvalidData(
            "null (often a serialized NaN) cannot be exported".into(),
        )),
        _ => Ok(value.clone()),
    }
}

pub fn write_json(value: &Value, path: &Path) -> Result<()> {
    let canonical = canonical_json(value)?;
    let mut text = serde_json::to_string_pretty(&canonical)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(Error::Io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["r", "value"]).unwrap();
        t.push(&[1e3, 5.873863e-11]).unwrap();
        t.push(&[1e4, 8.101718e-16]).unwrap();
        t.push(&[0.1 + 0.2, -3.0]).unwrap();
        t.push(&[f64::MIN_POSITIVE, f64::MAX]).unwrap();
        t
    }

    #[test]
    fn identical_inputs_yield_identical_bytes() {
        assert_eq!(sample().to_csv(), sample().to_csv());
        let v = serde_json::json!({"b": 1.0 / 3.0, "a": {"z": 2e-300, "m": [1.5, -0.25]}});
        let s1 = serde_json::to_string(&canonical_json(&v).unwrap()).unwrap();
        let s2 = serde_json::to_string(&canonical_json(&v).unwrap()).unwrap();
        assert_eq!(s1, s2);
        // keys come out sorted
        assert!(s1.find("\"a\"").unwrap() < s1.find("\"b\"").unwrap());
    }

    #[test]
    fn csv_roundtrip_preserves_records() {
        let t = sample();
        let back = Table::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut t = Table::new(&["x"]).unwrap();
        assert!(t.push(&[f64::NAN]).is_err());
        assert!(t.push(&[f64::INFINITY]).is_err());
        assert!(t.rows().is_empty());
        let v = serde_json::json!({"ok": 1.0, "bad": f64::NAN});
        assert!(canonical_json(&v).is_err());
    }

    #[test]
    fn row_shape_is_enforced() {
        let mut t = Table::new(&["a", "b"]).unwrap();
        assert!(t.push(&[1.0]).is_err());
        assert!(t.push(&[1.0, 2.0, 3.0]).is_err());
        assert!(t.push(&[1.0, 2.0]).is_ok());
    }
}
