//! Check records shared by the suites and the CLI.

use serde::Serialize;

/// One named check: `value` compared against `tol` (value ≤ tol passes).
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckLine {
    pub fn within(name: impl Into<String>, value: f64, tol: f64) -> Self {
        CheckLine { name: name.into(), value, tol, passed: value <= tol, note: None }
    }

    /// A boolean verdict with an associated number for the record.
    pub fn verdict(name: impl Into<String>, passed: bool, value: f64) -> Self {
        CheckLine { name: name.into(), value, tol: f64::NAN, passed, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A measured quantity that is recorded but not asserted.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<CheckLine>,
    pub observations: Vec<Observation>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> Self {
        SuiteReport { suite: suite.into(), ..Default::default() }
    }

    pub fn push(&mut self, c: CheckLine) {
        self.checks.push(c);
    }

    pub fn observe(&mut self, name: impl Into<String>, value: f64, reference: Option<f64>, note: Option<&str>) {
        self.observations.push(Observation { name: name.into(), value, reference, note: note.map(str::to_owned) });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckLine> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// `PASS name value` / `FAIL name value` lines.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {} {:.3e}", c.name, c.value));
            if c.tol.is_finite() {
                s.push_str(&format!(" (tol {:.1e})", c.tol));
            }
            s.push('\n');
        }
        for o in &self.observations {
            s.push_str(&format!("NOTE {} {:.6e}", o.name, o.value));
            if let Some(r) = o.reference {
                s.push_str(&format!(" (reference {r:.6e})"));
            }
            s.push('\n');
        }
        s
    }
}
