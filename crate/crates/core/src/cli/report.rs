//! Run reports: deterministic JSON with sorted keys and numbers rounded to
//! twelve significant digits.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Significant digits kept in every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round to [`SIGNIFICANT_DIGITS`] significant digits; non-finite values
/// pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Round every float inside a JSON value. Integers stay integers.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub config: Value,
    pub results: Value,
    /// "ok", "check_failed" or "error".
    pub status: String,
    pub exit_code: i32,
    pub error: Option<ErrorInfo>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)
            .map_err(|e| Error::Numeric(format!("cannot serialize report: {e}")))?;
        round_value(&mut v);
        serde_json::to_string_pretty(&v)
            .map_err(|e| Error::Numeric(format!("cannot serialize report: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Schema(format!(
                "report: line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }
}

pub fn save_report(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()? + "\n")
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    RunReport::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig(-2.0), -2.0);
        assert_eq!(round_sig(f64::INFINITY), f64::INFINITY);
        let mut v = serde_json::json!({"a": [1.00000000000049, 3], "b": {"c": 2.5}});
        round_value(&mut v);
        assert_eq!(v["a"][0].as_f64().unwrap(), 1.0);
        assert!(v["a"][1].is_u64());
    }
}
