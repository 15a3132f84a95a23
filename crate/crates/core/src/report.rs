//! Structured verdicts shared by the checkers and the command line tool.

use serde::Serialize;

/// A single failed rule together with the elements that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub witness: Vec<String>,
}

impl Violation {
    pub fn new(rule: impl Into<String>, witness: impl IntoIterator<Item = impl ToString>) -> Self {
        Self { rule: rule.into(), witness: witness.into_iter().map(|w| w.to_string()).collect() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: [{}]", self.rule, self.witness.join(", "))
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub id: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Violation>,
}

impl Verdict {
    pub fn pass(id: impl Into<String>) -> Self {
        Self { id: id.into(), passed: true, detail: String::new(), witnesses: Vec::new() }
    }

    pub fn from_violations(id: impl Into<String>, violations: Vec<Violation>) -> Self {
        Self { id: id.into(), passed: violations.is_empty(), detail: String::new(), witnesses: violations }
    }

    pub fn fail(id: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { id: id.into(), passed: false, detail: detail.into(), witnesses: Vec::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", if self.passed { "PASS" } else { "FAIL" }, self.id)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        for v in &self.witnesses {
            write!(f, "\n    {v}")?;
        }
        Ok(())
    }
}

pub fn all_passed(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.passed)
}
