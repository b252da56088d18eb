use serde::{Deserialize, Serialize};

/// Outcome of one verification procedure. `pass` holds iff `defect ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub defect: f64,
    pub tolerance: f64,
    pub details: serde_json::Value,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, defect: f64, tolerance: f64, details: serde_json::Value) -> Self {
        CheckReport {
            check: check.into(),
            // NaN defects fail
            pass: defect <= tolerance,
            defect,
            tolerance,
            details,
        }
    }

    /// A failed report for a check that could not run.
    pub fn failed(check: impl Into<String>, defect: f64, tolerance: f64, details: serde_json::Value) -> Self {
        let mut r = Self::new(check, defect, tolerance, details);
        r.pass = false;
        r
    }

    /// One report for several checks with different tolerances. The defect
    /// is the largest `defect / tolerance` ratio (a zero tolerance maps
    /// positive defects to infinity), compared against 1; `pass` also
    /// requires every part to pass.
    pub fn combine(check: impl Into<String>, parts: Vec<CheckReport>) -> Self {
        let ratio = |r: &CheckReport| {
            if r.tolerance > 0.0 {
                r.defect / r.tolerance
            } else if r.defect <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let defect = parts.iter().map(ratio).fold(0.0, f64::max);
        let all = parts.iter().all(|r| r.pass);
        let mut r = Self::new(check, defect, 1.0, serde_json::json!({ "parts": parts }));
        r.pass &= all;
        r
    }
}
