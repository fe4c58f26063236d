//! Run one verification suite and print its checks.
//!
//! `cargo run --release --example verify_suite -- optimizer`

use collapse_lab::lab::verify::{run_suite, Suite};

fn main() -> collapse_lab::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("hurwitz").parse()?;
    let report = run_suite(suite, 0)?;
    for check in &report.checks {
        println!("{check}");
    }
    println!("passed: {}", report.passed);
    Ok(())
}
