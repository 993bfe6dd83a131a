//! Primitive quantities of the collaborative-learning economy.
//!
//! Everything here is a pure function of a validated [`LearningEnv`]: the
//! risk-excess bound, the outside option, agent utilities, utilitarian
//! welfare and the maximum admissible contribution of a coalition member.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Raw environment parameters, as they appear in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvParams {
    /// PAC constant multiplying `(1+n)^-gamma`.
    pub alpha_delta: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Weight on model accuracy.
    pub a: f64,
    /// Unit sampling cost.
    pub c: f64,
    /// Bayes risk of the hypothesis class; an additive constant in every utility.
    #[serde(default)]
    pub r_star: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

fn default_delta() -> f64 {
    0.05
}

/// A validated learning environment.
///
/// Construction enforces finiteness, the sign constraints on every
/// parameter and the non-degeneracy condition `2a/c > 1/(gamma*alpha_delta)`,
/// which is equivalent to a strictly positive outside sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvParams", into = "EnvParams")]
pub struct LearningEnv {
    params: EnvParams,
    ratio: f64,
    outside_samples: f64,
}

impl TryFrom<EnvParams> for LearningEnv {
    type Error = Error;

    fn try_from(params: EnvParams) -> Result<Self> {
        LearningEnv::new(params)
    }
}

impl From<LearningEnv> for EnvParams {
    fn from(env: LearningEnv) -> Self {
        env.params
    }
}

impl LearningEnv {
    pub fn new(params: EnvParams) -> Result<Self> {
        let EnvParams { alpha_delta, beta, gamma, delta, a, c, r_star, theta_min, theta_max } =
            params;
        let fields = [
            ("alpha_delta", alpha_delta),
            ("beta", beta),
            ("gamma", gamma),
            ("delta", delta),
            ("a", a),
            ("c", c),
            ("r_star", r_star),
            ("theta_min", theta_min),
            ("theta_max", theta_max),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, format!("must be finite, got {value}")));
            }
        }
        for (name, value) in [("alpha_delta", alpha_delta), ("gamma", gamma), ("a", a), ("c", c)] {
            if value <= 0.0 {
                return Err(invalid(name, format!("must be positive, got {value}")));
            }
        }
        for (name, value) in [("beta", beta), ("r_star", r_star), ("theta_min", theta_min)] {
            if value < 0.0 {
                return Err(invalid(name, format!("must be nonnegative, got {value}")));
            }
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
        }
        if theta_max < theta_min {
            return Err(invalid(
                "theta_max",
                format!("must be at least theta_min = {theta_min}, got {theta_max}"),
            ));
        }

        let ratio = a / c;
        let scale = 2.0 * ratio * gamma * alpha_delta;
        if scale <= 1.0 {
            return Err(Error::DegenerateEnv { ratio: 2.0 * ratio, bound: 1.0 / (gamma * alpha_delta) });
        }
        let outside_samples = scale.powf(1.0 / (gamma + 1.0)) - 1.0;
        Ok(Self { params, ratio, outside_samples })
    }

    /// The reference instance used throughout the docs and tests:
    /// `alpha_delta = 1, beta = 0, gamma = 1, a = 50, c = 1, R* = 0`,
    /// types in `[0, 0.06]`, giving an outside sample count of 9.
    pub fn reference() -> Self {
        Self::new(EnvParams {
            alpha_delta: 1.0,
            beta: 0.0,
            gamma: 1.0,
            delta: 0.05,
            a: 50.0,
            c: 1.0,
            r_star: 0.0,
            theta_min: 0.0,
            theta_max: 0.06,
        })
        .expect("reference environment is valid")
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn alpha_delta(&self) -> f64 {
        self.params.alpha_delta
    }
    pub fn beta(&self) -> f64 {
        self.params.beta
    }
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }
    pub fn delta(&self) -> f64 {
        self.params.delta
    }
    pub fn a(&self) -> f64 {
        self.params.a
    }
    pub fn c(&self) -> f64 {
        self.params.c
    }
    pub fn r_star(&self) -> f64 {
        self.params.r_star
    }
    pub fn theta_min(&self) -> f64 {
        self.params.theta_min
    }
    pub fn theta_max(&self) -> f64 {
        self.params.theta_max
    }

    /// Accuracy-to-cost ratio `a/c`. Every sample count in the model depends
    /// on `a` and `c` only through this value.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Copy with `(a, c)` replaced by `(kappa*a, kappa*c)`.
    pub fn with_cost_scale(&self, kappa: f64) -> Result<Self> {
        Self::new(EnvParams { a: self.params.a * kappa, c: self.params.c * kappa, ..self.params })
    }

    pub fn with_r_star(&self, r_star: f64) -> Result<Self> {
        Self::new(EnvParams { r_star, ..self.params })
    }

    pub fn with_type_bounds(&self, theta_min: f64, theta_max: f64) -> Result<Self> {
        Self::new(EnvParams { theta_min, theta_max, ..self.params })
    }

    /// High-probability excess risk `2[alpha_delta (1+n)^-gamma + beta + theta]`
    /// of ERM on `n` samples of type `theta`.
    pub fn risk_excess(&self, theta: f64, n: f64) -> f64 {
        2.0 * (self.params.alpha_delta * (1.0 + n).powf(-self.params.gamma)
            + self.params.beta
            + theta)
    }

    /// Optimal number of samples drawn under the outside option. Independent of
    /// the agent's type.
    pub fn outside_samples(&self) -> f64 {
        self.outside_samples
    }

    /// Utility of training alone on `n` samples.
    pub fn standalone_utility(&self, theta: f64, n: f64) -> f64 {
        -self.params.a * (self.params.r_star + self.risk_excess(theta, n)) - self.params.c * n
    }

    /// Best achievable utility under the outside option, `o(theta)`.
    pub fn outside_utility(&self, theta: f64) -> f64 {
        self.standalone_utility(theta, self.outside_samples)
    }

    /// Utility of a coalition member who contributes `n` samples to a
    /// coalition whose pooled model has excess risk `coalition_excess`.
    pub fn member_utility(&self, coalition_excess: f64, n: f64) -> f64 {
        -self.params.a * (self.params.r_star + coalition_excess) - self.params.c * n
    }

    /// Largest contribution keeping a member of type `theta` at its outside
    /// option, given the coalition's excess risk. May be negative.
    pub fn max_contribution_at(&self, coalition_excess: f64, theta: f64) -> f64 {
        self.outside_samples
            - self.ratio * (coalition_excess - self.risk_excess(theta, self.outside_samples))
    }

    /// Upper bound on any admissible contribution: `n° + (2a/c)[alpha (1+n°)^-gamma + diam]`.
    pub fn contribution_cap(&self) -> f64 {
        let n_out = self.outside_samples;
        n_out
            + 2.0
                * self.ratio
                * (self.params.alpha_delta * (1.0 + n_out).powf(-self.params.gamma)
                    + self.params.theta_max
                    - self.params.theta_min)
    }
}

/// True types of the `J` agents, strictly increasing inside the type space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentPool {
    thetas: Vec<f64>,
}

impl AgentPool {
    pub fn new(thetas: Vec<f64>, env: &LearningEnv) -> Result<Self> {
        if thetas.is_empty() {
            return Err(invalid("thetas", "at least one agent is required"));
        }
        let (min, max) = (env.theta_min(), env.theta_max());
        for (index, &theta) in thetas.iter().enumerate() {
            let ordered = index == 0 || theta > thetas[index - 1];
            if !theta.is_finite() || theta < min || theta > max || !ordered {
                return Err(Error::TypesNotStrict { index, min, max });
            }
        }
        Ok(Self { thetas })
    }

    /// `count` evenly spaced types on `[low, high]` (both endpoints included
    /// when `count > 1`).
    pub fn evenly_spaced(count: usize, low: f64, high: f64, env: &LearningEnv) -> Result<Self> {
        let thetas = match count {
            0 => Vec::new(),
            1 => vec![low],
            _ => (0..count)
                .map(|i| {
                    let w = i as f64 / (count - 1) as f64;
                    (1.0 - w) * low + w * high
                })
                .collect(),
        };
        Self::new(thetas, env)
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j < self.thetas.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: j, len: self.thetas.len() })
        }
    }
}

/// Membership vector together with per-agent sample counts.
///
/// A non-member's entry is the number of samples it draws on its own; it
/// never enters the pooled total `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionScheme {
    members: Vec<bool>,
    samples: Vec<f64>,
}

impl ContributionScheme {
    pub fn new(members: Vec<bool>, samples: Vec<f64>) -> Result<Self> {
        if members.len() != samples.len() {
            return Err(Error::LengthMismatch { expected: members.len(), got: samples.len() });
        }
        for (_, &n) in members.iter().zip(&samples) {
            if !n.is_finite() || n < 0.0 {
                return Err(invalid("samples", format!("contributions must be finite and >= 0, got {n}")));
            }
        }
        Ok(Self { members, samples })
    }

    /// Everyone is a member.
    pub fn grand(samples: Vec<f64>) -> Result<Self> {
        Self::new(vec![true; samples.len()], samples)
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_member(&self, j: usize) -> bool {
        self.members[j]
    }

    /// Total pooled samples `N`.
    pub fn total(&self) -> f64 {
        self.members.iter().zip(&self.samples).filter(|(&b, _)| b).map(|(_, &n)| n).sum()
    }

    /// Number of members contributing a positive amount.
    pub fn contributor_count(&self) -> usize {
        self.members.iter().zip(&self.samples).filter(|(&b, &n)| b && n > 0.0).count()
    }

    pub fn member_count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    /// Sample-weighted average of `types` over the coalition; `None` when
    /// nothing is pooled.
    pub fn weighted_type(&self, types: &[f64]) -> Option<f64> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        let weighted: f64 = self
            .members
            .iter()
            .zip(&self.samples)
            .zip(types)
            .filter(|((&b, _), _)| b)
            .map(|((_, &n), &t)| n * t)
            .sum();
        Some(weighted / total)
    }

    /// Excess risk of the pooled model when the samples come from `types`.
    pub fn coalition_excess(&self, types: &[f64], env: &LearningEnv) -> Result<f64> {
        let vartheta = self.weighted_type(types).ok_or(Error::EmptyCoalition)?;
        Ok(env.risk_excess(vartheta, self.total()))
    }
}

/// Utility of agent `j` under `scheme`. Non-members are evaluated at their
/// own `n_j`, members at the pooled model.
pub fn agent_utility(
    j: usize,
    scheme: &ContributionScheme,
    pool: &AgentPool,
    env: &LearningEnv,
) -> Result<f64> {
    pool.check_index(j)?;
    check_len(scheme, pool)?;
    let n_j = scheme.samples()[j];
    if scheme.is_member(j) {
        let excess = scheme.coalition_excess(pool.thetas(), env)?;
        Ok(env.member_utility(excess, n_j))
    } else {
        Ok(env.standalone_utility(pool.thetas()[j], n_j))
    }
}

/// Utilitarian welfare. Non-members are assumed to play their optimal
/// outside option, so they contribute `o(theta_j)` regardless of `n_j`.
pub fn welfare(scheme: &ContributionScheme, pool: &AgentPool, env: &LearningEnv) -> Result<f64> {
    check_len(scheme, pool)?;
    let excess = if scheme.member_count() > 0 {
        Some(scheme.coalition_excess(pool.thetas(), env)?)
    } else {
        None
    };
    Ok(pool
        .thetas()
        .iter()
        .enumerate()
        .map(|(j, &theta)| match excess {
            Some(e) if scheme.is_member(j) => env.member_utility(e, scheme.samples()[j]),
            _ => env.outside_utility(theta),
        })
        .sum())
}

/// Maximum number of samples member `j` can be asked for while staying at
/// least as well off as under the outside option.
pub fn max_contribution(
    j: usize,
    scheme: &ContributionScheme,
    pool: &AgentPool,
    env: &LearningEnv,
) -> Result<f64> {
    pool.check_index(j)?;
    check_len(scheme, pool)?;
    let excess = scheme.coalition_excess(pool.thetas(), env)?;
    Ok(env.max_contribution_at(excess, pool.thetas()[j]))
}

fn check_len(scheme: &ContributionScheme, pool: &AgentPool) -> Result<()> {
    if scheme.len() != pool.len() {
        return Err(Error::LengthMismatch { expected: pool.len(), got: scheme.len() });
    }
    Ok(())
}
