//! Acceptance gate. Every suite runs, prints one pass/fail line, and the test
//! fails at the end if any suite failed.

use anchored_core::par::Execution;
use anchored_core::verify::{run_suite, SUITES};

#[test]
fn acceptance() {
    // ANCHORED_SUITES=cores,heat narrows the run while iterating locally
    let only = std::env::var("ANCHORED_SUITES").ok();
    let wanted = |name: &str| {
        only.as_deref()
            .is_none_or(|list| list.split(',').any(|s| s.trim() == name))
    };
    let mut failed = Vec::new();
    println!();
    for (k, name) in SUITES.iter().enumerate().filter(|(_, n)| wanted(n)) {
        let report = run_suite(name, Execution::Parallel)
            .unwrap_or_else(|e| panic!("suite {name} errored: {e}"));
        let mark = if report.passed { "PASS" } else { "FAIL" };
        println!(
            "[{mark}] criterion {:>2} {name:<14} checked={} violations={} {:.2}s  {}",
            k + 1,
            report.checked,
            report.violations,
            report.seconds,
            report.summary
        );
        for c in &report.counterexamples {
            println!("         counterexample: {c}");
        }
        if !report.passed {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
