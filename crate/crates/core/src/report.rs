//! Check results and the JSON verification report.

use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// status = pass iff |measured − expected| ≤ tolerance (absolute), or
/// ≤ tolerance·|expected| when `relative` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub status: Status,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn compare(id: &str, measured: f64, expected: f64, tolerance: f64, relative: bool) -> Self {
        let err = (measured - expected).abs();
        let bound = if relative { tolerance * expected.abs() } else { tolerance };
        let ok = err <= bound && measured.is_finite();
        CheckReport {
            check_id: id.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            expected,
            tolerance,
            relative,
            runtime_ms: 0,
            note: None,
        }
    }

    /// A check on a nonnegative error quantity: pass iff measured ≤ tolerance.
    pub fn bound(id: &str, measured: f64, tolerance: f64) -> Self {
        CheckReport::compare(id, measured, 0.0, tolerance, false)
    }

    /// A yes/no property; measured is 1 on success.
    pub fn flag(id: &str, ok: bool) -> Self {
        CheckReport::compare(id, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, false)
    }

    pub fn failed(id: &str, why: String) -> Self {
        CheckReport {
            check_id: id.to_string(),
            status: Status::Fail,
            measured: f64::NAN,
            expected: f64::NAN,
            tolerance: 0.0,
            relative: false,
            runtime_ms: 0,
            note: Some(why),
        }
    }

    pub fn skipped(id: &str, why: &str) -> Self {
        CheckReport {
            status: Status::Skip,
            note: Some(why.to_string()),
            ..CheckReport::failed(id, String::new())
        }
    }

    pub fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    /// Overrides the status with an explicit predicate.
    pub fn with_status(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Runs `f`, turning errors into failed checks and recording the runtime.
pub fn timed<F>(id: &str, f: F) -> CheckReport
where
    F: FnOnce() -> crate::Result<CheckReport>,
{
    let t = Instant::now();
    let mut r = match f() {
        Ok(r) => r,
        Err(e) => CheckReport::failed(id, e.to_string()),
    };
    r.check_id = id.to_string();
    r.runtime_ms = t.elapsed().as_millis() as u64;
    r
}
