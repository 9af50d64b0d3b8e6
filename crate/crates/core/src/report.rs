//! Check outcomes shared by the analysis routines and the harness.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Holds,
    Skipped,
    PreconditionUnmet,
    BudgetExceeded,
    /// A claimed bound failed on a concrete input.
    Violated,
}

impl CheckStatus {
    pub fn is_ok(self) -> bool {
        matches!(self, CheckStatus::Holds | CheckStatus::Skipped)
    }

    pub fn from_bool(holds: bool) -> Self {
        if holds {
            CheckStatus::Holds
        } else {
            CheckStatus::Violated
        }
    }
}

/// One checked claim: what was claimed, where it comes from, the verdict
/// and the data needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claim: String,
    pub paper_ref: String,
    pub status: CheckStatus,
    pub witness: Value,
}

impl CheckReport {
    pub fn new(claim: impl Into<String>, paper_ref: impl Into<String>, status: CheckStatus, witness: Value) -> Self {
        Self {
            claim: claim.into(),
            paper_ref: paper_ref.into(),
            status,
            witness,
        }
    }

    pub fn from_error(claim: impl Into<String>, paper_ref: impl Into<String>, err: &crate::Error) -> Self {
        let status = match err {
            crate::Error::BudgetExceeded { .. } => CheckStatus::BudgetExceeded,
            _ => CheckStatus::PreconditionUnmet,
        };
        Self::new(claim, paper_ref, status, Value::String(err.to_string()))
    }
}

/// Process exit code for a batch: 2 if any claim was violated, else 3 for
/// an unmet precondition, else 4 for an exhausted budget, else 0.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    let has = |s| reports.iter().any(|r| r.status == s);
    if has(CheckStatus::Violated) {
        2
    } else if has(CheckStatus::PreconditionUnmet) {
        3
    } else if has(CheckStatus::BudgetExceeded) {
        4
    } else {
        0
    }
}
