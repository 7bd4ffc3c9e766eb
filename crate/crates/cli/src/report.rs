use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Residual {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Residual {
            name: name.into(),
            value,
            tolerance,
            passed: value < tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub residuals: Vec<Residual>,
    /// Seconds since the Unix epoch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, results: Value) -> Self {
        RunReport {
            command: command.into(),
            inputs,
            results,
            residuals: Vec::new(),
            timestamp: None,
        }
    }

    pub fn with_residuals(mut self, residuals: Vec<Residual>) -> Self {
        self.residuals = residuals;
        self
    }

    pub fn stamp(&mut self) {
        self.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two-column `key  value` listing plus a residual table.
    pub fn to_human(&self) -> String {
        let mut rows = Vec::new();
        flatten("inputs", &self.inputs, &mut rows);
        flatten("results", &self.results, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = format!("command  {}\n", self.command);
        for (k, v) in rows {
            out.push_str(&format!("{k:width$}  {v}\n"));
        }
        if !self.residuals.is_empty() {
            let width = self.residuals.iter().map(|r| r.name.len()).max().unwrap_or(0);
            out.push_str(&format!(
                "\n{:width$}  {:>12}  {:>9}  status\n",
                "residual", "value", "tolerance"
            ));
            for r in &self.residuals {
                let status = if r.passed { "ok" } else { "FAIL" };
                out.push_str(&format!(
                    "{:width$}  {:>12.3e}  {:>9.0e}  {status}\n",
                    r.name, r.value, r.tolerance
                ));
            }
        }
        if let Some(t) = self.timestamp {
            out.push_str(&format!("\ntimestamp  {t}\n"));
        }
        out
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, rows);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_output_lists_nested_fields() {
        let report = RunReport::new(
            "pure",
            serde_json::json!({"file": "a.json"}),
            serde_json::json!({"value": 1.0}),
        )
        .with_residuals(vec![Residual::new("r", 1e-13, 1e-12)]);
        let text = report.to_human();
        assert!(text.contains("inputs.file"));
        assert!(text.contains("results.value"));
        assert!(text.contains("ok"));
        assert!(!report.to_json().contains("timestamp"));
    }
}
