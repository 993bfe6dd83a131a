//! The primitives of the economy: standalone sample count, outside option
//! and a member's utility inside a pooled model.
//!
//! ```bash
//! cargo run --example outside_option
//! ```

use collab_incentives::{LearningEnv, Result};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let n_out = env.outside_samples();
    println!("a/c = {}, standalone sample count n° = {n_out}", env.ratio());

    for theta in [0.0, 0.02, 0.04, 0.06] {
        // nobody gains from drawing more or fewer samples than n° alone
        let best = env.outside_utility(theta);
        let nearby = [n_out - 1.0, n_out + 1.0].map(|n| env.standalone_utility(theta, n));
        println!(
            "theta = {theta:.2}: o(theta) = {best:.4}  (n°-1: {:.4}, n°+1: {:.4})",
            nearby[0], nearby[1]
        );
    }

    // a member of a 20-sample pool of average type 0.01 that contributes 5
    let excess = env.risk_excess(0.01, 20.0);
    println!("member utility at n = 5: {:.4}", env.member_utility(excess, 5.0));
    println!("max contribution of a theta = 0.06 member: {:.4}", env.max_contribution_at(excess, 0.06));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
