use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// A labelled number: which operation produced it, at which resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub operation: String,
    pub subject: String,
    pub resolution: String,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub crate_version: String,
    pub seed: u64,
    pub resolutions: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
}

/// Outcome of a scenario run. Field order is the JSON key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config: serde_json::Value,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub provenance: Provenance,
    pub passed: bool,
}

impl Report {
    pub(crate) fn new(scenario: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            scenario: scenario.to_string(),
            config,
            metrics: Vec::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
            provenance: Provenance {
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                resolutions: BTreeMap::new(),
                tolerances: BTreeMap::new(),
            },
            passed: true,
        }
    }

    pub(crate) fn metric(&mut self, operation: &str, subject: &str, resolution: impl Into<String>, name: &str, value: f64) {
        self.metrics.push(Metric {
            operation: operation.into(),
            subject: subject.into(),
            resolution: resolution.into(),
            name: name.into(),
            value,
        });
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub(crate) fn resolution(&mut self, what: &str, value: impl Into<String>) {
        self.provenance.resolutions.insert(what.into(), value.into());
    }

    pub(crate) fn tolerance(&mut self, what: &str, value: f64) {
        self.provenance.tolerances.insert(what.into(), value);
    }

    /// First metric with the given subject and name.
    pub fn value(&self, subject: &str, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.subject == subject && m.name == name)
            .map(|m| m.value)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), text + "\n")?;
        Ok(())
    }
}
