//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion.

use spinboson::verify::{run_verification, VerifyOptions};

#[test]
fn acceptance_criteria() {
    let report = run_verification(&VerifyOptions::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    for e in &report.errata {
        println!(
            "  erratum {}: printed {:.2e} ({}), corrected {:.2e} ({})",
            e.id,
            e.printed_metric,
            if e.printed_fails { "fails" } else { "PASSES" },
            e.corrected_metric,
            if e.corrected_passes { "passes" } else { "FAILS" }
        );
    }
    println!("total {:.1} s", report.seconds);
    let failed: Vec<&str> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
