use serde::Serialize;

use crate::pairing::QuadratureScheme;
use crate::rules::ScoringRuleId;

/// One checked inequality or identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord {
    pub id: String,
    /// Digest of the inputs (densities and directions).
    pub digest: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseRecord {
    /// Passes iff `residual ≤ tol`; NaN fails.
    pub fn check(id: impl Into<String>, digest: impl Into<String>, residual: f64, tol: f64) -> Self {
        CaseRecord {
            id: id.into(),
            digest: digest.into(),
            residual,
            tol,
            pass: residual <= tol,
            note: None,
        }
    }

    /// A case whose evaluation itself failed.
    pub fn error(id: impl Into<String>, digest: impl Into<String>, tol: f64, err: impl ToString) -> Self {
        CaseRecord {
            id: id.into(),
            digest: digest.into(),
            residual: f64::INFINITY,
            tol,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<ScoringRuleId>,
    pub seed: u64,
    pub scheme: QuadratureScheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strictness: Option<String>,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(suite: &str, rule: Option<ScoringRuleId>, seed: u64, scheme: &QuadratureScheme) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            rule,
            seed,
            scheme: scheme.clone(),
            strictness: None,
            cases: Vec::new(),
            summary: Summary { pass: 0, total: 0 },
        }
    }

    pub fn push(&mut self, case: CaseRecord) {
        self.summary.total += 1;
        if case.pass {
            self.summary.pass += 1;
        }
        self.cases.push(case);
    }

    pub fn extend<I: IntoIterator<Item = CaseRecord>>(&mut self, cases: I) {
        for c in cases {
            self.push(c);
        }
    }

    /// Appends another report's cases with ids prefixed by its suite name.
    pub fn absorb(&mut self, other: VerificationReport) {
        let prefix = other.suite.clone();
        if self.strictness.is_none() {
            self.strictness = other.strictness.clone();
        }
        self.absorb_as(&prefix, other);
    }

    /// Appends another report's cases with ids prefixed by `prefix`.
    pub fn absorb_as(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.cases {
            c.id = format!("{prefix}/{}", c.id);
            self.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.pass == self.summary.total
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
