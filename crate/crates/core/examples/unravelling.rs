//! The naive revelation game: enumerate pure Nash equilibria over a
//! declaration grid and follow best-response dynamics from truth-telling.
//!
//! ```bash
//! cargo run --release --example unravelling
//! ```

use collab_incentives::game::{ActionProfile, DeclarationGrid, NaiveGame, DEFAULT_J_CAP};
use collab_incentives::{AgentPool, LearningEnv, Result};

pub fn run() -> Result<()> {
    let env = LearningEnv::reference();
    let pool = AgentPool::new(vec![0.0, 0.03, 0.06], &env)?;
    let game = NaiveGame::new(&pool, &env, DeclarationGrid::uniform(5, &env)?);

    let truthful = game.certify_nash(&ActionProfile::truthful(&pool))?;
    if let Some(w) = truthful.witness {
        println!("truth-telling is not an equilibrium: agent {} gains {:.4} by playing {}", w.agent, w.gain, w.action);
    }

    for eq in game.enumerate_pure_nash(DEFAULT_J_CAP)? {
        println!("Nash: [{}]  shape = {}", eq.profile, eq.coalition_shape.as_str());
    }

    let dynamics = game.best_response_dynamics(&ActionProfile::truthful(&pool), 30)?;
    println!("coalition size by round: {:?} (converged: {})", dynamics.sizes, dynamics.converged);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
