//! Verification mechanism: every member supplies a small batch, types are
//! estimated, and allocations use deliberately biased estimates.
//!
//! ```bash
//! cargo run --release --example verification
//! ```

use collab_incentives::mechanism::{widened_floor_eta, NoiseModel, Verifier};
use collab_incentives::{AgentPool, LearningEnv, Result};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.02, 0.04, 0.06], &env)?;
    let limit = widened_floor_eta(&env)?;

    let v = Verifier::new(&pool, &env, 0.5 * limit)?;
    let round = v.round(&[true; 4], pool.thetas())?;
    println!("q_floor = {}, eta = {:.4}", v.q_floor, v.eta);
    println!("allocated {:?}", round.allocated);
    println!("kept      {:?}", round.kept);

    for factor in [0.5, 2.0, 4.0] {
        let v = Verifier::new(&pool, &env, factor * limit)?;
        for noise in [NoiseModel::UniformWithinEta, NoiseModel::CornersWithinEta] {
            let mc = v.monte_carlo_nash(noise, 2_000, 7)?;
            println!(
                "eta = {factor} x {limit:.4}, {:<18}: Nash in {:.4} of trials [{:.4}, {:.4}]",
                noise.as_str(),
                mc.fraction,
                mc.ci_low,
                mc.ci_high
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
