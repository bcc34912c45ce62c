//! Generate random instances of each profile, round-trip them through JSON and
//! run the full property suite.
//!
//! Run with `cargo run --release --example verify [count]`.

use krein_calculus::harness::{generate, run_suite, Instance, Profile};

fn main() -> krein_calculus::Result<()> {
    let count: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(12);
    let mut failed = 0;
    for seed in 0..count {
        let profile = Profile::ALL[seed as usize % Profile::ALL.len()];
        let generated = generate(seed, 2 + seed as usize % 7, profile);
        let instance = Instance::from_json(&generated.to_json())?;
        let report = run_suite(&instance);
        let failures: Vec<_> = report.failures().map(|p| p.name.as_str()).collect();
        println!(
            "{:<28} {:>3} properties, {} failed, {} ms {}",
            instance.label,
            report.properties.len(),
            failures.len(),
            report.elapsed_ms,
            failures.join(" ")
        );
        failed += failures.len();
    }
    println!("{failed} failures");
    Ok(())
}
