//! Scheme whose contributors are asked for exactly their maximum admissible
//! contribution, found by a damped fixed point.
//!
//! ```bash
//! cargo run --example binding_scheme
//! ```

use collab_incentives::{agent_utility, binding_scheme, AgentPool, LearningEnv, Result};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.02, 0.04, 0.06], &env)?;
    let sol = binding_scheme(pool.thetas(), &env)?;
    println!("L* = {}, residual = {:.2e}", sol.l_star, sol.residual);
    for (j, &n) in sol.scheme.samples().iter().enumerate() {
        let slack = agent_utility(j, &sol.scheme, &pool, &env)? - env.outside_utility(pool.thetas()[j]);
        // contributors sit on their participation constraint
        println!("agent {j}: n = {n:>8.4}  u - o = {slack:+.2e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
