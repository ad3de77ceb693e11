use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of a single named validation rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub rule: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Pass/fail per rule, with the first failure of each rule described.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport { valid: true, checks: Vec::new() }
    }

    pub fn record(&mut self, rule: &str, failure: Option<String>) {
        let passed = failure.is_none();
        self.valid &= passed;
        self.checks.push(Check { rule: rule.to_owned(), passed, detail: failure });
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn check(&self, rule: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.rule == rule)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            match &c.detail {
                Some(d) => writeln!(f, "{mark} {:<22} {d}", c.rule)?,
                None => writeln!(f, "{mark} {}", c.rule)?,
            }
        }
        write!(f, "{}", if self.valid { "valid" } else { "invalid" })
    }
}
