//! Welfare of the closed-form scheme against the exhaustive grid oracle and
//! the continuous waterfill optimum.
//!
//! ```bash
//! cargo run --release --example oracle_welfare
//! ```

use collab_incentives::{
    brute_force_optimal_scheme, simplified_scheme, waterfill_optimal_scheme, welfare, AgentPool, LearningEnv,
    Result,
};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.03, 0.06], &env)?;

    let simple = simplified_scheme(pool.thetas(), &env)?;
    let oracle = brute_force_optimal_scheme(&pool, &env, 0.25)?;
    let water = waterfill_optimal_scheme(&pool, &env)?;
    for (name, sol) in [("closed form", &simple), ("oracle (step 0.25)", &oracle), ("waterfill", &water)] {
        println!(
            "{name:>20}: n = {:?}  W = {:.4}",
            sol.scheme.samples().iter().map(|n| (n * 1e3).round() / 1e3).collect::<Vec<_>>(),
            welfare(&sol.scheme, &pool, &env)?
        );
    }
    println!("oracle membership: {:?}", oracle.scheme.members());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
