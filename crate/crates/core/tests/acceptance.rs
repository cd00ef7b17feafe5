//! The release gate: every criterion runs at its stated tolerance and
//! prints one pass/fail line. Run with `--nocapture` to see the lines on
//! success; a failure prints the full check-by-check report.

use sema_core::{run_acceptance, AcceptanceConfig};

#[test]
fn all_acceptance_criteria_pass() {
    let report = run_acceptance(&AcceptanceConfig::default());
    for line in report.summary_lines() {
        println!("{line}");
    }
    assert!(report.passed(), "\n{}", report.render());
}
