//! Acceptance suite: one PASS/FAIL line per criterion, each timed against its
//! runtime budget. Exits nonzero when any criterion fails.

#[path = "../../../core/tests/common/mod.rs"]
mod common;
mod learning;
mod properties;
#[path = "../support/mod.rs"]
mod support;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

fn criterion(n: usize, title: &str, budget_s: f64, f: fn() -> Verdict) -> bool {
    let start = Instant::now();
    let v = panic::catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|e| Verdict::new(false, format!("panicked: {}", panic_message(e))));
    let secs = start.elapsed().as_secs_f64();
    let pass = v.pass && secs < budget_s;
    println!(
        "{} criterion {n} ({title}): {}; {secs:.1}s of {budget_s:.0}s",
        if pass { "PASS" } else { "FAIL" },
        v.detail
    );
    pass
}

type Criterion = (&'static str, f64, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("formula unit suite", 60.0, examples::run),
        ("gradient fidelity", 60.0, properties::gradient_fidelity),
        ("estimators vs enumeration", 120.0, properties::estimators),
        (
            "advantage and weight invariants",
            60.0,
            properties::invariants,
        ),
        ("metric correctness", 60.0, properties::metrics),
        ("end-to-end held-out SRCC", 600.0, learning::end_to_end),
        ("weighting reward trend", 1800.0, learning::weighting_trend),
        (
            "perception separation trend",
            1200.0,
            learning::perception_gap,
        ),
        ("determinism and interfaces", 120.0, learning::determinism),
    ];
    let failed: Vec<usize> = criteria
        .iter()
        .enumerate()
        .filter(|(i, (title, budget, f))| !criterion(i + 1, title, *budget, *f))
        .map(|(i, _)| i + 1)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
