use std::fmt;

use serde::{Deserialize, Serialize};

/// One named check and what it found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

/// The outcome of a verifier: every check it ran, passing or not.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub findings: Vec<Finding>,
    /// Caveats that do not fail the report, e.g. skipped separations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, check: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.findings.push(Finding {
            check: check.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| !f.passed)
    }

    pub fn merge(&mut self, other: Report) {
        self.findings.extend(other.findings);
        self.notes.extend(other.notes);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.findings {
            let mark = if x.passed { "ok  " } else { "FAIL" };
            if x.detail.is_empty() {
                writeln!(f, "{mark} {}", x.check)?;
            } else {
                writeln!(f, "{mark} {}: {}", x.check, x.detail)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note {n}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.findings.len())
    }
}
