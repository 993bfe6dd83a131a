//! Random valid environments and pools for property checks and sweeps.

use rand::Rng;

use crate::econ::{AgentPool, EnvParams, LearningEnv};
use crate::error::Result;

/// Ranges for [`random_env`]. The cost/accuracy pair is derived from a drawn
/// standalone sample count so that instances stay at desk scale.
#[derive(Debug, Clone, Copy)]
pub struct EnvRanges {
    pub outside_samples: (f64, f64),
    pub alpha_delta: (f64, f64),
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
    pub c: (f64, f64),
    pub r_star: (f64, f64),
    /// Width of the type space as a fraction of `n° / (2a/c)`. Values below
    /// one keep the verification floor positive.
    pub spread: (f64, f64),
}

impl Default for EnvRanges {
    fn default() -> Self {
        Self {
            outside_samples: (4.0, 20.0),
            alpha_delta: (0.5, 1.5),
            beta: (0.0, 0.05),
            gamma: (0.5, 1.5),
            c: (0.5, 2.0),
            r_star: (0.0, 0.1),
            spread: (0.1, 1.5),
        }
    }
}

impl EnvRanges {
    /// Ranges whose every draw admits a positive verification floor.
    pub fn verifiable() -> Self {
        Self { spread: (0.1, 0.8), ..Self::default() }
    }
}

fn draw(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

pub fn random_env(rng: &mut impl Rng, ranges: &EnvRanges) -> Result<LearningEnv> {
    let n_out = draw(rng, ranges.outside_samples);
    let alpha = draw(rng, ranges.alpha_delta);
    let gamma = draw(rng, ranges.gamma);
    let c = draw(rng, ranges.c);
    // n° = (2 a gamma alpha / c)^(1/(gamma+1)) - 1, solved for a
    let a = c * (1.0 + n_out).powf(gamma + 1.0) / (2.0 * gamma * alpha);
    let ratio = a / c;
    let width = draw(rng, ranges.spread) * n_out / (2.0 * ratio);
    LearningEnv::new(EnvParams {
        alpha_delta: alpha,
        beta: draw(rng, ranges.beta),
        gamma,
        delta: 0.05,
        a,
        c,
        r_star: draw(rng, ranges.r_star),
        theta_min: 0.0,
        theta_max: width,
    })
}

/// `count` distinct types drawn uniformly on the env's type space, sorted,
/// with consecutive gaps of at least a thousandth of the width.
pub fn random_pool(rng: &mut impl Rng, count: usize, env: &LearningEnv) -> Result<AgentPool> {
    let (lo, hi) = (env.theta_min(), env.theta_max());
    let min_gap = 1e-3 * (hi - lo);
    loop {
        let mut thetas: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..=hi)).collect();
        thetas.sort_by(f64::total_cmp);
        if thetas.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return AgentPool::new(thetas, env);
        }
    }
}
