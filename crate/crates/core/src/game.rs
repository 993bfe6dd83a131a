//! The naive direct-revelation game.
//!
//! Each agent either stays out or joins while declaring a type. The
//! aggregator runs a full-information scheme on the declarations of the
//! agents who joined, while the shared model's excess risk depends on the
//! true types of the contributors. Declarations are restricted to a finite
//! grid so that equilibria can be certified exhaustively.

use rayon::prelude::*;
use serde::Serialize;

use crate::econ::{AgentPool, LearningEnv};
use crate::error::{invalid, Error, Result};
use crate::scheme::{scheme_for_mode, SchemeMode};

/// Gains at or below this value are not strict improvements.
pub const DEFAULT_TIE_EPS: f64 = 1e-9;
pub const DEFAULT_J_CAP: usize = 4;
pub const MAX_GRID_FOR_ENUMERATION: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Out,
    In(f64),
}

impl Action {
    pub fn is_in(&self) -> bool {
        matches!(self, Action::In(_))
    }

    pub fn declared(&self) -> Option<f64> {
        match *self {
            Action::Out => None,
            Action::In(t) => Some(t),
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Out => write!(f, "out"),
            Action::In(t) => write!(f, "in({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ActionProfile {
    pub actions: Vec<Action>,
}

impl ActionProfile {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn all_out(count: usize) -> Self {
        Self { actions: vec![Action::Out; count] }
    }

    pub fn truthful(pool: &AgentPool) -> Self {
        Self { actions: pool.thetas().iter().map(|&t| Action::In(t)).collect() }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.actions.len()).filter(|&j| self.actions[j].is_in()).collect()
    }

    pub fn with(&self, j: usize, action: Action) -> Self {
        let mut out = self.clone();
        out.actions[j] = action;
        out
    }

    pub fn shape(&self) -> CoalitionShape {
        let members = self.members();
        match members.as_slice() {
            [] => CoalitionShape::Empty,
            [j] if *j + 1 == self.actions.len() => CoalitionShape::WorstOnly,
            _ => CoalitionShape::Other,
        }
    }
}

impl std::fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.actions.iter().map(Action::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionShape {
    Empty,
    WorstOnly,
    Other,
}

impl CoalitionShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoalitionShape::Empty => "empty",
            CoalitionShape::WorstOnly => "worst_only",
            CoalitionShape::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub agent: usize,
    pub action: Action,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub profile: ActionProfile,
    pub is_nash: bool,
    /// Most profitable strict deviation when the profile is not Nash.
    pub witness: Option<Deviation>,
    pub coalition_shape: CoalitionShape,
    pub payoffs: Vec<f64>,
    /// Largest unilateral gain over all deviations. Values within the tie
    /// threshold of zero flag knife-edge indifference.
    pub margin: f64,
}

/// Uniform grid of admissible declarations on `[theta_min, theta_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DeclarationGrid {
    points: Vec<f64>,
}

impl DeclarationGrid {
    /// `size` evenly spaced points including both endpoints; a single point
    /// grid is `{theta_min}`.
    pub fn uniform(size: usize, env: &LearningEnv) -> Result<Self> {
        let (lo, hi) = (env.theta_min(), env.theta_max());
        match size {
            0 => Err(invalid("grid_size", "declaration grid must be nonempty")),
            1 => Ok(Self { points: vec![lo] }),
            _ => {
                let mut points: Vec<f64> = (0..size)
                    .map(|i| {
                        let w = i as f64 / (size - 1) as f64;
                        (1.0 - w) * lo + w * hi
                    })
                    .collect();
                points.dedup();
                Ok(Self { points })
            }
        }
    }

    /// Explicit grid; must contain `theta_min` and stay within the type space.
    pub fn new(mut points: Vec<f64>, env: &LearningEnv) -> Result<Self> {
        if points.iter().any(|p| !(env.theta_min()..=env.theta_max()).contains(p)) {
            return Err(invalid("grid", "declarations must lie in [theta_min, theta_max]"));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.first() != Some(&env.theta_min()) {
            return Err(invalid("grid", "declaration grid must contain theta_min"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `out` first, then every grid point in increasing order.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        std::iter::once(Action::Out).chain(self.points.iter().map(|&p| Action::In(p)))
    }
}

/// Allocation and payoffs induced by one action profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub samples: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Contribution-weighted average of true types (`None` without members).
    pub weighted_type: Option<f64>,
    /// Same weights applied to declared types.
    pub declared_weighted_type: Option<f64>,
    pub l_star: usize,
    pub consistent: bool,
}

impl Outcome {
    pub fn contributors(&self) -> Vec<usize> {
        (0..self.samples.len()).filter(|&j| self.samples[j] > 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsStep {
    pub round: usize,
    pub agent: usize,
    pub action: Action,
    pub coalition_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsResult {
    pub profile: ActionProfile,
    pub converged: bool,
    pub rounds: usize,
    /// Coalition size at the start and after each round.
    pub sizes: Vec<usize>,
    pub steps: Vec<DynamicsStep>,
}

/// The naive revelation game on a fixed pool and declaration grid.
#[derive(Debug, Clone)]
pub struct NaiveGame<'a> {
    pool: &'a AgentPool,
    env: &'a LearningEnv,
    grid: DeclarationGrid,
    mode: SchemeMode,
    tie_eps: f64,
}

impl<'a> NaiveGame<'a> {
    pub fn new(pool: &'a AgentPool, env: &'a LearningEnv, grid: DeclarationGrid) -> Self {
        Self { pool, env, grid, mode: SchemeMode::BindingFixedPoint, tie_eps: DEFAULT_TIE_EPS }
    }

    pub fn with_mode(mut self, mode: SchemeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tie_eps(mut self, tie_eps: f64) -> Self {
        self.tie_eps = tie_eps;
        self
    }

    pub fn grid(&self) -> &DeclarationGrid {
        &self.grid
    }

    pub fn mode(&self) -> SchemeMode {
        self.mode
    }

    pub fn pool(&self) -> &AgentPool {
        self.pool
    }

    fn check_profile(&self, profile: &ActionProfile) -> Result<()> {
        if profile.len() != self.pool.len() {
            return Err(Error::LengthMismatch { expected: self.pool.len(), got: profile.len() });
        }
        for a in &profile.actions {
            if let Action::In(t) = a {
                if !(self.env.theta_min()..=self.env.theta_max()).contains(t) {
                    return Err(invalid("declared", format!("{t} outside the type space")));
                }
            }
        }
        Ok(())
    }

    pub fn outcome(&self, profile: &ActionProfile) -> Result<Outcome> {
        self.check_profile(profile)?;
        let env = self.env;
        let thetas = self.pool.thetas();
        let members = profile.members();
        let mut samples = vec![0.0; thetas.len()];
        let mut payoffs: Vec<f64> = thetas.iter().map(|&t| env.outside_utility(t)).collect();
        if members.is_empty() {
            return Ok(Outcome {
                samples,
                payoffs,
                weighted_type: None,
                declared_weighted_type: None,
                l_star: 0,
                consistent: true,
            });
        }
        let declared: Vec<f64> =
            members.iter().map(|&j| profile.actions[j].declared().unwrap_or_default()).collect();
        let solution = scheme_for_mode(&declared, self.mode, env)?;
        for (k, &j) in members.iter().enumerate() {
            samples[j] = solution.scheme.samples()[k];
        }
        let total: f64 = samples.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyCoalition);
        }
        let weighted = members.iter().map(|&j| samples[j] * thetas[j]).sum::<f64>() / total;
        let declared_weighted =
            members.iter().zip(&declared).map(|(&j, &d)| samples[j] * d).sum::<f64>() / total;
        let excess = env.risk_excess(weighted, total);
        for &j in &members {
            payoffs[j] = env.member_utility(excess, samples[j]);
        }
        Ok(Outcome {
            samples,
            payoffs,
            weighted_type: Some(weighted),
            declared_weighted_type: Some(declared_weighted),
            l_star: solution.l_star,
            consistent: solution.consistent,
        })
    }

    pub fn payoffs(&self, profile: &ActionProfile) -> Result<Vec<f64>> {
        Ok(self.outcome(profile)?.payoffs)
    }

    pub fn naive_payoff(&self, j: usize, profile: &ActionProfile) -> Result<f64> {
        self.pool.check_index(j)?;
        Ok(self.payoffs(profile)?[j])
    }

    /// Payoff-maximising action of agent `j` against `profile`. Near-ties go
    /// to the current action, then to `out`, then to the smallest declaration.
    pub fn best_response(&self, j: usize, profile: &ActionProfile) -> Result<(Action, f64)> {
        self.pool.check_index(j)?;
        let mut options = Vec::with_capacity(self.grid.len() + 1);
        for action in self.grid.actions() {
            options.push((action, self.naive_payoff(j, &profile.with(j, action))?));
        }
        Ok(pick_best(&options, profile.actions[j], self.tie_eps))
    }

    /// Checks every unilateral deviation over `{out} ∪ grid`.
    pub fn certify_nash(&self, profile: &ActionProfile) -> Result<EquilibriumReport> {
        let payoffs = self.payoffs(profile)?;
        let mut deviations = Vec::new();
        for j in 0..profile.len() {
            for action in self.grid.actions() {
                if action == profile.actions[j] {
                    continue;
                }
                let value = self.naive_payoff(j, &profile.with(j, action))?;
                deviations.push(Deviation { agent: j, action, gain: value - payoffs[j] });
            }
        }
        Ok(self.report(profile.clone(), payoffs, &deviations))
    }

    fn report(
        &self,
        profile: ActionProfile,
        payoffs: Vec<f64>,
        deviations: &[Deviation],
    ) -> EquilibriumReport {
        let mut best: Option<Deviation> = None;
        for d in deviations {
            if best.is_none_or(|b| d.gain > b.gain) {
                best = Some(*d);
            }
        }
        let margin = best.map_or(f64::NEG_INFINITY, |b| b.gain);
        let witness = best.filter(|b| b.gain > self.tie_eps);
        EquilibriumReport {
            coalition_shape: profile.shape(),
            is_nash: witness.is_none(),
            witness,
            profile,
            payoffs,
            margin,
        }
    }

    /// Every pure Nash profile of the discretised game, in profile order.
    pub fn enumerate_pure_nash(&self, j_cap: usize) -> Result<Vec<EquilibriumReport>> {
        Ok(self.certify_all(j_cap)?.into_iter().filter(|r| r.is_nash).collect())
    }

    /// Certificates for all `(|grid| + 1)^J` profiles, in profile order.
    /// Digit `0` of the profile code is `out`, digit `d` declares grid point `d - 1`.
    pub fn certify_all(&self, j_cap: usize) -> Result<Vec<EquilibriumReport>> {
        let j_count = self.pool.len();
        if j_count > j_cap {
            return Err(Error::TooLarge { what: "agents for enumeration", got: j_count, limit: j_cap });
        }
        if self.grid.len() > MAX_GRID_FOR_ENUMERATION {
            return Err(Error::TooLarge {
                what: "declaration grid",
                got: self.grid.len(),
                limit: MAX_GRID_FOR_ENUMERATION,
            });
        }
        let base = self.grid.len() + 1;
        let count = base.pow(j_count as u32);
        let table: Vec<Vec<f64>> = (0..count)
            .into_par_iter()
            .map(|code| self.payoffs(&self.decode(code)))
            .collect::<Result<_>>()?;
        let reports = (0..count)
            .into_par_iter()
            .map(|code| {
                let profile = self.decode(code);
                let mut deviations = Vec::with_capacity(j_count * (base - 1));
                let mut stride = 1;
                let mut digits = vec![0; j_count];
                let mut rest = code;
                for d in digits.iter_mut().rev() {
                    *d = rest % base;
                    rest /= base;
                }
                for j in (0..j_count).rev() {
                    let current = digits[j];
                    for digit in 0..base {
                        if digit == current {
                            continue;
                        }
                        let other = code - current * stride + digit * stride;
                        deviations.push(Deviation {
                            agent: j,
                            action: self.digit_action(digit),
                            gain: table[other][j] - table[code][j],
                        });
                    }
                    stride *= base;
                }
                deviations.sort_by_key(|d| d.agent);
                self.report(profile, table[code].clone(), &deviations)
            })
            .collect();
        Ok(reports)
    }

    fn digit_action(&self, digit: usize) -> Action {
        if digit == 0 {
            Action::Out
        } else {
            Action::In(self.grid.points()[digit - 1])
        }
    }

    /// Profile with code digits in agent order, agent 0 most significant.
    pub fn decode(&self, code: usize) -> ActionProfile {
        let base = self.grid.len() + 1;
        let j_count = self.pool.len();
        let mut actions = vec![Action::Out; j_count];
        let mut rest = code;
        for j in (0..j_count).rev() {
            actions[j] = self.digit_action(rest % base);
            rest /= base;
        }
        ActionProfile::new(actions)
    }

    /// Round-robin best responses from `start` until a full round changes
    /// nothing or `max_rounds` is reached.
    pub fn best_response_dynamics(
        &self,
        start: &ActionProfile,
        max_rounds: usize,
    ) -> Result<DynamicsResult> {
        self.check_profile(start)?;
        let mut profile = start.clone();
        let mut sizes = vec![profile.members().len()];
        let mut steps = Vec::new();
        let mut converged = false;
        let mut rounds = 0;
        while rounds < max_rounds {
            rounds += 1;
            let mut changed = false;
            for j in 0..profile.len() {
                let (action, _) = self.best_response(j, &profile)?;
                if action != profile.actions[j] {
                    profile.actions[j] = action;
                    changed = true;
                    steps.push(DynamicsStep {
                        round: rounds,
                        agent: j,
                        action,
                        coalition_size: profile.members().len(),
                    });
                }
            }
            sizes.push(profile.members().len());
            if !changed {
                converged = true;
                break;
            }
        }
        Ok(DynamicsResult { profile, converged, rounds, sizes, steps })
    }
}

fn pick_best(options: &[(Action, f64)], current: Action, tie_eps: f64) -> (Action, f64) {
    let max = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<&(Action, f64)> = options.iter().filter(|o| o.1 >= max - tie_eps).collect();
    if let Some(o) = near.iter().find(|o| o.0 == current) {
        return **o;
    }
    if let Some(o) = near.iter().find(|o| o.0 == Action::Out) {
        return **o;
    }
    *near
        .iter()
        .min_by(|x, y| x.0.declared().unwrap_or(f64::INFINITY).total_cmp(&y.0.declared().unwrap_or(f64::INFINITY)))
        .copied()
        .expect("at least one option")
}
