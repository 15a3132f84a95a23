//! Report types and their text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use xmodhol_core::Verdict;

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub name: String,
    pub kind: String,
    /// The crossed module, `W` structure or morphism the task ran on.
    pub target: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub sizes: BTreeMap<String, usize>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub listing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

impl TaskReport {
    pub fn new(name: &str, kind: &str, target: String) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
            target,
            passed: true,
            sizes: BTreeMap::new(),
            verdicts: Vec::new(),
            listing: Vec::new(),
            millis: None,
        }
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.passed &= v.passed;
        self.verdicts.push(v);
    }

    pub fn size(&mut self, key: &str, n: usize) {
        self.sizes.insert(key.into(), n);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for t in &self.tasks {
            let tag = if t.passed { "PASS" } else { "FAIL" };
            let _ = write!(s, "{tag} task {} ({} on {})", t.name, t.kind, t.target);
            if let Some(ms) = t.millis {
                let _ = write!(s, " [{ms:.1} ms]");
            }
            s.push('\n');
            if !t.sizes.is_empty() {
                let sizes: Vec<String> = t.sizes.iter().map(|(k, v)| format!("{v} {k}")).collect();
                let _ = writeln!(s, "  sizes: {}", sizes.join(", "));
            }
            for v in &t.verdicts {
                for line in v.to_string().lines() {
                    let _ = writeln!(s, "  {line}");
                }
            }
            for line in &t.listing {
                let _ = writeln!(s, "  | {line}");
            }
        }
        let passed = self.tasks.iter().filter(|t| t.passed).count();
        let _ = writeln!(s, "{passed} of {} tasks pass", self.tasks.len());
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}
