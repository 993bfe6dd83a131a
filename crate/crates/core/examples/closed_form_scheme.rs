//! Full-information contribution scheme in closed form, on the reference
//! instance with four agents.
//!
//! ```bash
//! cargo run --example closed_form_scheme
//! ```

use collab_incentives::{
    agent_utility, select_contributor_count, simplified_scheme, target_total_samples, welfare, AgentPool,
    LearningEnv, Result,
};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.02, 0.04, 0.06], &env)?;

    let (l, consistent) = select_contributor_count(pool.thetas(), &env)?;
    println!("contributors L* = {l} (prefix-sum test passed: {consistent})");
    println!("pooled target for {} members: {}", pool.len(), target_total_samples(pool.len(), &env));

    let sol = simplified_scheme(pool.thetas(), &env)?;
    for (j, &n) in sol.scheme.samples().iter().enumerate() {
        let u = agent_utility(j, &sol.scheme, &pool, &env)?;
        let o = env.outside_utility(pool.thetas()[j]);
        println!("agent {j}: n = {n:>6.3}  u - o = {:+.4}", u - o);
    }
    println!("welfare = {:.4}", welfare(&sol.scheme, &pool, &env)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
