//! How the number of contributors and the welfare gap grow with the pool.
//!
//! ```bash
//! cargo run --release --example scaling_sweep
//! ```

use collab_incentives::{simplified_scheme, welfare_gap_proxy, AgentPool, LearningEnv, Result};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let exponent = 1.0 / (1.0 + env.gamma());
    println!("{:>4} {:>4} {:>10} {:>12}", "J", "L*", "L*/J^e", "welfare gap");
    for j in [2usize, 4, 9, 16, 25, 36] {
        let pool = AgentPool::evenly_spaced(j, env.theta_min(), env.theta_max(), &env)?;
        let sol = simplified_scheme(pool.thetas(), &env)?;
        let gap = welfare_gap_proxy(&pool, &env)?;
        println!("{j:>4} {:>4} {:>10.4} {gap:>12.4}", sol.l_star, sol.l_star as f64 / (j as f64).powf(exponent));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
