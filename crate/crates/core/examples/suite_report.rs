//! Runs the acceptance battery and prints one CHECK line per sub-check.

use backward_orbits::suite::{run_suite, DEFAULT_SEED};

fn main() -> backward_orbits::Result<()> {
    let report = run_suite(DEFAULT_SEED)?;
    print!("{report}");
    println!("overall: {}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(())
}
