use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One asserted invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            passed: value >= threshold,
        }
    }

    /// A yes/no condition recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}/{}", self.name);
        self
    }
}

/// What a command produced before it is wrapped in a [`Report`].
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    pub warnings: Vec<String>,
    /// `(file name, contents)` pairs written next to the JSON report.
    pub csv: Vec<(String, String)>,
    /// Whether any series lost terms to the degree cap.
    pub truncated: bool,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub result: Value,
    pub warnings: Vec<String>,
    pub csv_files: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, outcome: &Outcome) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            command: command.to_string(),
            version: crate::VERSION.to_string(),
            timestamp,
            config,
            passed: outcome.passed(),
            checks: outcome.checks.clone(),
            result: outcome.result.clone(),
            warnings: outcome.warnings.clone(),
            csv_files: outcome.csv.iter().map(|(name, _)| name.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only serializable data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed);
        assert!(Check::holds("x", true).passed);
    }

    #[test]
    fn envelope_fields() {
        let out = Outcome {
            checks: vec![Check::at_most("r", 0.5, 1.0)],
            ..Outcome::default()
        };
        let r = Report::new("norms", RunConfig::bare(1, 0.0, 2.0), &out);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["command", "version", "timestamp", "config", "passed", "checks", "result", "warnings"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["checks"][0]["relation"], "<=");
        assert_eq!(v["passed"], true);
    }
}
