//! Transfer-based and verification-based mechanisms.
//!
//! [`vcg_transfers`] computes pivot transfers for the full-information scheme
//! and [`check_positive_transfer`] exhibits the agent who would have to be
//! paid. The verification mechanism asks every member for a small batch of
//! `q̲` samples, estimates types, and allocates with deliberately biased
//! estimates: each member's own estimate is shaded down by `eta` while all
//! others are shaded up.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::{AgentPool, LearningEnv};
use crate::error::{invalid, Error, Result};
use crate::scheme::{scheme_for_mode, SchemeMode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VcgReport {
    /// `t_j`: change in the others' utilities caused by removing `j` while
    /// keeping the scheme vector. Negative entries are payments to `j`.
    pub transfers: Vec<f64>,
    pub samples: Vec<f64>,
    /// `u_j` inside the coalition minus `j`'s outside option.
    pub participation_slack: Vec<f64>,
    pub l_star: usize,
}

/// VCG transfers for truthful or arbitrary declarations of all `J` agents,
/// evaluated at the pool's true types.
pub fn vcg_transfers(
    declared: &[f64],
    pool: &AgentPool,
    env: &LearningEnv,
    mode: SchemeMode,
) -> Result<VcgReport> {
    let j_count = pool.len();
    if declared.len() != j_count {
        return Err(Error::LengthMismatch { expected: j_count, got: declared.len() });
    }
    let solution = scheme_for_mode(declared, mode, env)?;
    let samples = solution.scheme.samples().to_vec();
    let thetas = pool.thetas();
    let total: f64 = samples.iter().sum();
    let weighted: f64 = samples.iter().zip(thetas).map(|(n, t)| n * t).sum();
    let excess = env.risk_excess(weighted / total, total);

    let mut transfers = vec![0.0; j_count];
    let mut participation_slack = vec![0.0; j_count];
    for j in 0..j_count {
        participation_slack[j] =
            env.member_utility(excess, samples[j]) - env.outside_utility(thetas[j]);
        if j_count == 1 {
            continue;
        }
        let rest_total = total - samples[j];
        if rest_total <= 0.0 {
            return Err(Error::EmptyCoalition);
        }
        let rest_excess = env.risk_excess((weighted - samples[j] * thetas[j]) / rest_total, rest_total);
        // The cost terms of the other members cancel.
        transfers[j] = -env.a() * (j_count - 1) as f64 * (rest_excess - excess);
    }
    Ok(VcgReport { transfers, samples, participation_slack, l_star: solution.l_star })
}

/// Some agent who would need a strictly positive payment (`-t_j > 0`), if any.
pub fn check_positive_transfer(transfers: &[f64]) -> Option<usize> {
    transfers.iter().position(|&t| -t > 0.0)
}

/// Largest admissible verification floor `n° - 2(a/c)(theta_max - theta_min)`.
pub fn max_q_floor(env: &LearningEnv) -> Result<f64> {
    let bound = env.outside_samples() - 2.0 * env.ratio() * (env.theta_max() - env.theta_min());
    if bound <= 0.0 {
        return Err(Error::InfeasibleVerification { bound });
    }
    Ok(bound)
}

/// Largest estimation error `eta` for which the type space widened by `eta`
/// on both sides still admits a positive verification floor, that is
/// `n° - 2(a/c)(theta_max - theta_min + 2 eta) >= 0`. Beyond this value the
/// biased estimates can spread far enough that a member's own allocation
/// collapses to a lone contributor asked for more than its participation
/// constraint allows, and the grand coalition stops being an equilibrium.
pub fn widened_floor_eta(env: &LearningEnv) -> Result<f64> {
    Ok(max_q_floor(env)? / (4.0 * env.ratio()))
}

/// Verification floor: the maximal value, or a smaller requested one.
pub fn q_floor(env: &LearningEnv, requested: Option<f64>) -> Result<f64> {
    let bound = max_q_floor(env)?;
    match requested {
        None => Ok(bound),
        Some(q) if q > 0.0 && q <= bound => Ok(q),
        Some(q) => Err(invalid("q_floor", format!("must lie in (0, {bound}], got {q}"))),
    }
}

/// `+eta` everywhere except `-eta` at position `j` (zero-based).
pub fn bias_vector(j: usize, coalition_size: usize, eta: f64) -> Result<Vec<f64>> {
    if j >= coalition_size {
        return Err(Error::IndexOutOfRange { index: j, len: coalition_size });
    }
    let mut v = vec![eta; coalition_size];
    v[j] = -eta;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRound {
    pub members: Vec<bool>,
    pub estimates: Vec<f64>,
    pub eta: f64,
    pub q_floor: f64,
    /// `n*_j` on the member's own biased estimate vector (zero for non-members).
    pub allocated: Vec<f64>,
    pub requested: Vec<f64>,
    pub kept: Vec<f64>,
    pub payoffs: Vec<f64>,
}

/// Verification mechanism parameters shared by all rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verifier<'a> {
    pub pool: &'a AgentPool,
    pub env: &'a LearningEnv,
    pub eta: f64,
    pub q_floor: f64,
    pub mode: SchemeMode,
}

impl<'a> Verifier<'a> {
    /// Verifier with the maximal floor and the closed-form scheme.
    pub fn new(pool: &'a AgentPool, env: &'a LearningEnv, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(invalid("eta", format!("must be finite and >= 0, got {eta}")));
        }
        Ok(Self { pool, env, eta, q_floor: q_floor(env, None)?, mode: SchemeMode::ClosedForm })
    }

    pub fn with_q_floor(mut self, q: f64) -> Result<Self> {
        self.q_floor = q_floor(self.env, Some(q))?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: SchemeMode) -> Self {
        self.mode = mode;
        self
    }

    /// One round for membership `members`; `estimates[j]` is read for members only.
    pub fn round(&self, members: &[bool], estimates: &[f64]) -> Result<VerificationRound> {
        let env = self.env;
        let thetas = self.pool.thetas();
        let j_count = thetas.len();
        for len in [members.len(), estimates.len()] {
            if len != j_count {
                return Err(Error::LengthMismatch { expected: j_count, got: len });
            }
        }
        let idx: Vec<usize> = (0..j_count).filter(|&j| members[j]).collect();
        let mut allocated = vec![0.0; j_count];
        let mut requested = vec![0.0; j_count];
        let mut kept = vec![0.0; j_count];
        let mut payoffs: Vec<f64> = thetas.iter().map(|&t| env.outside_utility(t)).collect();
        if idx.is_empty() {
            return Ok(VerificationRound {
                members: members.to_vec(),
                estimates: estimates.to_vec(),
                eta: self.eta,
                q_floor: self.q_floor,
                allocated,
                requested,
                kept,
                payoffs,
            });
        }
        let mut cache: HashMap<Vec<u64>, Vec<f64>> = HashMap::new();
        for (pos, &j) in idx.iter().enumerate() {
            let biased: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(k, &m)| estimates[m] + if k == pos { -self.eta } else { self.eta })
                .collect();
            let key: Vec<u64> = biased.iter().map(|x| x.to_bits()).collect();
            let samples = match cache.get(&key) {
                Some(s) => s.clone(),
                None => {
                    let s = scheme_for_mode(&biased, self.mode, env)?.scheme.samples().to_vec();
                    cache.insert(key, s.clone());
                    s
                }
            };
            let n = samples[pos];
            allocated[j] = n;
            requested[j] = n.max(self.q_floor);
            kept[j] = if n > 0.0 { requested[j] } else { 0.0 };
        }
        let total: f64 = kept.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyCoalition);
        }
        let weighted = kept.iter().zip(thetas).map(|(m, t)| m * t).sum::<f64>() / total;
        let excess = env.risk_excess(weighted, total);
        for &j in &idx {
            payoffs[j] = env.member_utility(excess, requested[j]);
        }
        Ok(VerificationRound {
            members: members.to_vec(),
            estimates: estimates.to_vec(),
            eta: self.eta,
            q_floor: self.q_floor,
            allocated,
            requested,
            kept,
            payoffs,
        })
    }

    /// Whether the grand coalition is a Nash equilibrium at these estimates.
    /// Leaving pays exactly the outside option, so `J` comparisons suffice.
    /// On failure returns the agent with the largest gain from leaving.
    pub fn grand_coalition_nash(&self, estimates: &[f64]) -> Result<(bool, Option<(usize, f64)>)> {
        let round = self.round(&vec![true; self.pool.len()], estimates)?;
        let mut witness: Option<(usize, f64)> = None;
        for (j, &t) in self.pool.thetas().iter().enumerate() {
            let gain = self.env.outside_utility(t) - round.payoffs[j];
            if gain > 0.0 && witness.is_none_or(|(_, g)| gain > g) {
                witness = Some((j, gain));
            }
        }
        Ok((witness.is_none(), witness))
    }

    /// Monte Carlo estimate of the probability that the grand coalition is
    /// Nash when estimates err by at most `eta`. Trial `i` draws from its own
    /// ChaCha stream, so results do not depend on scheduling.
    pub fn monte_carlo_nash(&self, noise: NoiseModel, trials: usize, seed: u64) -> Result<MonteCarloReport> {
        if trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        let rows: Vec<TrialRow> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(seed, trial as u64);
                let estimates: Vec<f64> = self
                    .pool
                    .thetas()
                    .iter()
                    .map(|&t| t + noise.draw(&mut rng, self.eta))
                    .collect();
                let (nash, witness) = self.grand_coalition_nash(&estimates)?;
                Ok(TrialRow { trial, estimates, nash, witness })
            })
            .collect::<Result<_>>()?;
        let successes = rows.iter().filter(|r| r.nash).count();
        let (ci_low, ci_high) = wilson_interval(successes, trials, 1.959_963_984_540_054);
        Ok(MonteCarloReport {
            noise,
            trials,
            successes,
            fraction: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            rows,
        })
    }
}

/// Independent per-trial generator: stream `trial` of the ChaCha8 key `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Estimation error uniform on `[-eta, eta]`.
    UniformWithinEta,
    /// Estimation error `-eta` or `+eta` with equal probability.
    CornersWithinEta,
}

impl NoiseModel {
    pub fn draw(&self, rng: &mut impl Rng, eta: f64) -> f64 {
        if eta == 0.0 {
            return 0.0;
        }
        match self {
            NoiseModel::UniformWithinEta => rng.gen_range(-eta..=eta),
            NoiseModel::CornersWithinEta => {
                if rng.gen::<bool>() {
                    eta
                } else {
                    -eta
                }
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseModel::UniformWithinEta => "uniform_within_eta",
            NoiseModel::CornersWithinEta => "corners_within_eta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub estimates: Vec<f64>,
    pub nash: bool,
    pub witness: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub noise: NoiseModel,
    pub trials: usize,
    pub successes: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rows: Vec<TrialRow>,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((center - half).max(0.0), (center + half).min(1.0))
}
