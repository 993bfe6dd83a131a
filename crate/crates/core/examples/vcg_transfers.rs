//! Pivot transfers for the full-information scheme. Some agent always has to
//! be paid, which the aggregator cannot afford.
//!
//! ```bash
//! cargo run --example vcg_transfers
//! ```

use collab_incentives::mechanism::{check_positive_transfer, vcg_transfers};
use collab_incentives::{AgentPool, LearningEnv, Result, SchemeMode};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.02, 0.04, 0.06], &env)?;
    let report = vcg_transfers(pool.thetas(), &pool, &env, SchemeMode::ClosedForm)?;
    for (j, t) in report.transfers.iter().enumerate() {
        println!("agent {j}: n = {:>5.2}  t = {t:+.4}", report.samples[j]);
    }
    match check_positive_transfer(&report.transfers) {
        Some(j) => println!("agent {j} must receive {:.4}", -report.transfers[j]),
        None => println!("no positive transfer needed"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
