//! Machine-readable verification reports.

use crate::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational record; never affects the exit status.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: Verdict,
    pub details: Value,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, details: impl Serialize) -> Self {
        CheckRecord {
            name: name.into(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            details: to_value(details),
        }
    }

    pub fn info(name: impl Into<String>, details: impl Serialize) -> Self {
        CheckRecord { name: name.into(), verdict: Verdict::Info, details: to_value(details) }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

fn to_value(details: impl Serialize) -> Value {
    serde_json::to_value(details).expect("report details always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Value,
    pub checks: Vec<CheckRecord>,
    pub ok: bool,
    pub assumptions: Vec<String>,
    pub wall_time_ms: Option<u64>,
    pub engine_version: String,
}

impl Report {
    pub fn new(command: Vec<String>, inputs: impl Serialize) -> Self {
        Report {
            command,
            inputs: to_value(inputs),
            checks: Vec::new(),
            ok: true,
            assumptions: Vec::new(),
            wall_time_ms: None,
            engine_version: ENGINE_VERSION.to_string(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.ok &= !check.failed();
        self.checks.push(check);
    }

    pub fn assume(&mut self, note: impl Into<String>) {
        self.assumptions.push(note.into());
    }

    /// Drops the only nondeterministic field.
    pub fn normalized(&self) -> Report {
        Report { wall_time_ms: None, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn failing_checks_clear_ok() {
        let mut r = Report::new(vec!["v2".into()], json!({"k": "2"}));
        r.push(CheckRecord::info("note", json!({})));
        assert!(r.ok);
        r.push(CheckRecord::new("trace", false, json!({"value": {"num": "1", "den": "2"}})));
        assert!(!r.ok);
    }

    #[test]
    fn round_trip_after_normalization() {
        let mut r = Report::new(vec!["cfp".into(), "--terms".into(), "2".into()], json!({"terms": 2}));
        r.push(CheckRecord::new("upper", true, json!({"rank": "960"})));
        r.wall_time_ms = Some(12);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back.normalized().to_json(), r.normalized().to_json());
        assert!(Report::from_json(r#"{"command":[],"extra":1}"#).is_err());
    }
}
