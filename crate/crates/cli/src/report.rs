//! Diagnostic reports: command echo, tolerances, metrics and per-check
//! verdicts. Keys are kept in sorted maps so output is byte-stable.

use std::collections::BTreeMap;

use pathlin_core::transport::SwitchEvent;
use pathlin_core::Manifold;
use serde::Serialize;

use crate::files::SCHEMA_VERSION;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Switch {
    pub node: usize,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifold: Option<String>,
    /// How distances in the metrics were measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<&'static str>,
    pub tolerances: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub switch_log: Vec<Switch>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &[String], model: Option<&dyn Manifold>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "report",
            command: command.to_vec(),
            manifold: model.map(|m| m.name().to_string()),
            distance: None,
            tolerances: BTreeMap::new(),
            metrics: BTreeMap::new(),
            switch_log: Vec::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    /// Records `value < tolerance` as a named check.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value < tolerance;
        self.tolerances.insert(name.into(), tolerance);
        self.metrics.insert(name.into(), value);
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            pass,
        });
        self.pass &= pass;
    }

    pub fn switches(&mut self, model: &dyn Manifold, log: &[SwitchEvent]) {
        self.switch_log.extend(log.iter().map(|e| Switch {
            node: e.node,
            from: model.chart_name(e.from).into(),
            to: model.chart_name(e.to).into(),
        }));
    }
}
