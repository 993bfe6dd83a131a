//! Driving the bench runner from code: parse a scenario, run it and look at
//! the summary without touching the file system.
//!
//! ```bash
//! cargo run --release --example run_scenario
//! ```

use collab_incentives::bench::{parse_scenario, run as run_bench, BenchError, Experiment, RunOptions};

pub fn run() -> Result<(), BenchError> {
    let scenario = parse_scenario(
        r#"{ "pool": { "thetas": [0.0, 0.02, 0.04, 0.06] }, "mc": { "trials": 500, "seed": 1 } }"#,
    )?;
    let report = run_bench(&scenario, Experiment::Verify, RunOptions { seed: None, workers: Some(2) })?;
    println!("files: {:?}", report.files.iter().map(|(n, _)| n).collect::<Vec<_>>());
    println!("derived: {}", report.summary["derived"]);
    for m in report.summary["results"]["noise_models"].as_array().into_iter().flatten() {
        println!("{}: nash_fraction = {}", m["noise"], m["nash_fraction"]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), BenchError> {
    run()
}
