//! Bookkeeping for acceptance runs: each check reports a verdict and a
//! one-line summary, and the run prints one PASS/FAIL line per check.

use std::time::{Duration, Instant};

/// Result of one acceptance check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}]: {} -- {} ({:.2?})",
            self.id,
            self.title,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail,
            self.elapsed
        )
    }
}

/// Accumulates conditions for one check; every condition is recorded in
/// the detail text whether it holds or not.
#[derive(Debug, Default)]
pub struct Checker {
    pass: bool,
    notes: Vec<String>,
}

impl Checker {
    pub fn new() -> Self {
        Checker {
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        self.notes
            .push(if ok { note } else { format!("NOT {note}") });
        self.pass &= ok;
    }

    /// Runtime limit, checked against the time since `start`.
    pub fn within(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(t < limit, format!("runtime {t:.2?} < {limit:?}"));
    }

    pub fn finish(self) -> (bool, String) {
        (self.pass, self.notes.join("; "))
    }
}

/// Criterion id, title and check; the check returns pass and a detail line.
pub type Criterion = (u32, &'static str, fn() -> (bool, String));

/// Run each check, print its line, and return the reports.
pub fn run_all(checks: &[Criterion]) -> Vec<CheckReport> {
    checks
        .iter()
        .map(|&(id, title, f)| {
            let start = Instant::now();
            let outcome = std::panic::catch_unwind(f);
            let (pass, detail) = outcome.unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            });
            let r = CheckReport {
                id,
                title,
                pass,
                detail,
                elapsed: start.elapsed(),
            };
            println!("{}", r.line());
            r
        })
        .collect()
}
