use serde::Serialize;

/// One failed assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    /// Iteration the assertion refers to (0 when not iteration-specific).
    pub k: usize,
    pub detail: String,
}

/// Tally of assertions evaluated and the ones that failed, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub checks_run: usize,
    pub violations: Vec<Violation>,
    /// Assertions skipped on purpose (e.g. a division by a zero `γ⁽²⁾`).
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn check(&mut self, name: &str, k: usize, ok: bool, detail: impl FnOnce() -> String) {
        self.checks_run += 1;
        if !ok {
            self.violations.push(Violation {
                check: name.to_string(),
                k,
                detail: detail(),
            });
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks_run += other.checks_run;
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    /// Violations whose check name starts with `prefix`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.violations
            .iter()
            .filter(|v| v.check.starts_with(prefix))
            .count()
    }
}
