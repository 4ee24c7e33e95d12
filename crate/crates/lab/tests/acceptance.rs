//! Runs every numbered acceptance criterion and prints one line each.
//!
//! `cargo test --release -p varmult-lab --test acceptance -- --nocapture`

use std::process::Command;
use std::time::{Duration, Instant};

use varmult_lab::criteria::CRITERIA;

const SELFTEST_BUDGET: Duration = Duration::from_secs(300);

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for criterion in CRITERIA {
        let report = criterion.run();
        println!("{report}");
        if !report.passed {
            failed.push(report.id);
        }
    }

    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_varmult-lab"))
        .arg("selftest")
        .output()
        .expect("selftest binary runs");
    let elapsed = start.elapsed();
    let ok = output.status.success() && elapsed <= SELFTEST_BUDGET;
    println!(
        "[{}] criterion 10 selftest: exit {:?}, {:.2} s of a {} s budget",
        if ok { "PASS" } else { "FAIL" },
        output.status.code(),
        elapsed.as_secs_f64(),
        SELFTEST_BUDGET.as_secs()
    );
    if !ok {
        println!("{}", String::from_utf8_lossy(&output.stdout));
        failed.push(10);
    }

    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
