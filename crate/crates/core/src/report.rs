//! Machine-readable verification reports.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Where the expected value of a case comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Immediate from the definitions.
    Trivial,
    /// Computed by an independent method.
    Derived,
    /// A published identity or inequality checked numerically.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub inputs_digest: String,
    /// `None` when the case could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseResult {
    pub fn new(
        id: &str,
        inputs: &str,
        residual: Result<f64, String>,
        tolerance: f64,
        provenance: Provenance,
        runtime_ms: f64,
    ) -> Self {
        let (residual, error) = match residual {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        CaseResult {
            id: id.to_string(),
            inputs_digest: digest(inputs),
            residual,
            tolerance,
            pass: residual.is_some_and(|r| r <= tolerance),
            provenance,
            runtime_ms,
            error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    /// Cases that produced no residual.
    pub unknown: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

impl VerificationReport {
    /// Sorts the cases by id and tallies the summary.
    pub fn new(suite: &str, seed: u64, mut cases: Vec<CaseResult>) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary::default();
        for c in &cases {
            match (c.residual, c.pass) {
                (None, _) => summary.unknown += 1,
                (Some(_), true) => summary.passed += 1,
                (Some(_), false) => summary.failed += 1,
            }
        }
        VerificationReport {
            schema: crate::spec::SCHEMA.to_string(),
            suite: suite.to_string(),
            seed,
            cases,
            summary,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0 && self.summary.unknown == 0
    }

    /// Whether the summary matches the cases and every flag matches its residual.
    pub fn is_consistent(&self) -> bool {
        let again = VerificationReport::new(&self.suite, self.seed, self.cases.clone());
        again.summary == self.summary
            && self
                .cases
                .iter()
                .all(|c| c.pass == c.residual.is_some_and(|r| r <= c.tolerance))
    }
}

/// Short stable digest of a case's inputs.
pub fn digest(inputs: &str) -> String {
    let mut h = DefaultHasher::new();
    inputs.hash(&mut h);
    format!("{:016x}", h.finish())
}
