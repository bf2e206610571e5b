//! One checked inequality instance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// `lhs ≤ rhs + tol`, with the constants that went into `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub inputs_digest: String,
    pub pass: bool,
    pub margin: f64,
    /// False when the hypotheses of the inequality were not met; such a
    /// report is informational and counts as neither pass nor failure.
    pub applicable: bool,
    pub constants: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64, inputs_digest: String) -> Self {
        BoundReport {
            label: label.into(),
            lhs,
            rhs,
            tol,
            inputs_digest,
            pass: lhs <= rhs + tol,
            margin: rhs - lhs,
            applicable: true,
            constants: BTreeMap::new(),
        }
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn inapplicable(mut self) -> Self {
        self.applicable = false;
        self
    }

    /// A failure that counts: the hypotheses held and the inequality did not.
    pub fn is_violation(&self) -> bool {
        self.applicable && !self.pass
    }
}

/// SHA-256 over a label and the exact bit patterns of `values`.
pub fn digest_f64s(label: &str, values: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update([0u8]);
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
