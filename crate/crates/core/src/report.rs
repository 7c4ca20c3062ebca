//! Machine-readable run reports: named checks with measured values and
//! tolerances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value >= tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub grid: Option<Grid>,
    pub checks: Vec<Check>,
    pub info: BTreeMap<String, serde_json::Value>,
    pub passed: bool,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), grid: None, checks: Vec::new(), info: BTreeMap::new(), passed: true }
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64, bound: Bound) -> Result<bool> {
        if self.checks.iter().any(|c| c.name == name) {
            return Err(Error::InvalidParameter { name: "check", reason: format!("duplicate check `{name}`") });
        }
        // NaN never passes.
        let passed = match bound {
            Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
        };
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), value, tolerance, bound, passed });
        Ok(passed)
    }

    /// Records `value <= tolerance`.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) -> Result<bool> {
        self.push(name, value, tolerance, Bound::AtMost)
    }

    /// Records `value >= bound`.
    pub fn check_at_least(&mut self, name: &str, value: f64, bound: f64) -> Result<bool> {
        self.push(name, value, bound, Bound::AtLeast)
    }

    pub fn info(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.info.insert(key.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_is_conjunction() {
        let mut r = ReportDocument::new("check");
        assert!(r.check("a", 1e-9, 1e-8).unwrap());
        assert!(r.passed);
        assert!(!r.check_at_least("ratio", 2.0, 3.5).unwrap());
        assert!(!r.passed);
        assert!(!r.check("nan", f64::NAN, 1.0).unwrap());
        assert_eq!(r.failed().count(), 2);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut r = ReportDocument::new("check");
        r.check("a", 0.0, 1.0).unwrap();
        assert!(r.check("a", 0.0, 1.0).is_err());
        assert_eq!(r.checks.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mut r = ReportDocument::new("build").with_grid(Grid::new(5, 6, 0.5, 0.5, 0.0, 0.0).unwrap());
        r.check("x", 0.25, 1.0).unwrap();
        r.info("lambda", 1.5);
        let back: ReportDocument = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
