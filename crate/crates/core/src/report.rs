//! Pass/fail records produced by the `check_*` functions.

use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

/// Result of one checked statement on one instance. A failing item carries
/// the first counterexample found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationItem {
    pub name: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl VerificationItem {
    pub fn pass(name: &str) -> Self {
        VerificationItem { name: name.to_string(), outcome: Outcome::Pass, witness: None, notes: vec![] }
    }

    pub fn fail(name: &str, witness: impl Into<String>) -> Self {
        VerificationItem {
            name: name.to_string(),
            outcome: Outcome::Fail,
            witness: Some(witness.into()),
            notes: vec![],
        }
    }

    pub fn not_applicable(name: &str, why: impl Into<String>) -> Self {
        VerificationItem {
            name: name.to_string(),
            outcome: Outcome::NotApplicable,
            witness: None,
            notes: vec![why.into()],
        }
    }

    /// Pass unless `first_failure` is `Some`.
    pub fn from_first_failure(name: &str, first_failure: Option<String>) -> Self {
        match first_failure {
            None => Self::pass(name),
            Some(w) => Self::fail(name, w),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

/// Every registered check run on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Canonical encoding of the instance's order (see `enumeration::instance_id`).
    pub instance_id: String,
    pub size: usize,
    pub items: Vec<VerificationItem>,
    /// Wall time per check, in the order of `items`. Not serialized, so
    /// JSON reports stay byte-identical across runs.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(VerificationItem::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationItem> {
        self.items.iter().filter(|i| !i.passed())
    }

    pub fn item(&self, name: &str) -> Option<&VerificationItem> {
        self.items.iter().find(|i| i.name == name)
    }
}
