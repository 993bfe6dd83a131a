//! Scenario schema, loading and validation.
//!
//! Field names are exactly those of the serde structs below; unknown fields
//! are rejected. Omitted sections take their defaults, and the resolved
//! scenario (defaults filled in) is what every output echoes.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::classif::{derive_seed, PacPreset};
use crate::econ::{AgentPool, EnvParams, LearningEnv};
use crate::error::Error;
use crate::instances::random_pool;
use crate::mechanism::{max_q_floor, widened_floor_eta, NoiseModel};
use crate::scheme::SchemeMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Scheme,
    Game,
    Vcg,
    Verify,
    Estimate,
    Sweep,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Scheme => "scheme",
            Experiment::Game => "game",
            Experiment::Vcg => "vcg",
            Experiment::Verify => "verify",
            Experiment::Estimate => "estimate",
            Experiment::Sweep => "sweep",
        }
    }

    fn default_mode(&self) -> SchemeMode {
        match self {
            Experiment::Game => SchemeMode::BindingFixedPoint,
            _ => SchemeMode::ClosedForm,
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, Experiment::Verify | Experiment::Estimate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Evenly spaced on `[low, high]`, both endpoints included.
    Even,
    /// Uniform draws on the type space, sorted; needs a seed.
    Random,
}

/// Either an explicit type list or a generator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    pub thetas: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub spacing: Option<Spacing>,
    /// Generator bounds; default to the env's type space.
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Points in the declaration grid of the naive game.
    pub declaration_size: usize,
    /// Sample-count step of the brute-force oracle.
    pub oracle_step: f64,
    /// Largest pool the game enumerates.
    pub j_cap: usize,
    /// Round limit of best-response dynamics.
    pub max_rounds: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { declaration_size: 5, oracle_step: 0.25, j_cap: 4, max_rounds: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub trials: usize,
    pub seed: Option<u64>,
    pub noise: Vec<NoiseModel>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: None,
            noise: vec![NoiseModel::UniformWithinEta, NoiseModel::CornersWithinEta],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Estimation error bound; defaults to `eta_fraction` times the widened-floor bound.
    pub eta: Option<f64>,
    pub eta_fraction: f64,
    /// Defaults to the maximal feasible floor.
    pub q_floor: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { eta: None, eta_fraction: 0.5, q_floor: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifConfig {
    pub t_star: f64,
    pub flip_probs: Vec<f64>,
    pub q: u64,
    pub q_prime: u64,
    pub delta: f64,
    pub preset: PacPreset,
    /// Number of agents the confidence level is split over.
    pub union_size: usize,
    pub trials: usize,
}

impl Default for ClassifConfig {
    fn default() -> Self {
        Self {
            t_star: 0.5,
            flip_probs: vec![0.0, 0.02, 0.04, 0.06],
            q: 50,
            q_prime: 200,
            delta: 0.05,
            preset: PacPreset::UnitRate,
            union_size: 1,
            trials: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Pool size; the pool spec must be a generator.
    J,
    /// Verification error bound.
    Eta,
    /// Own-sample count of the estimator.
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareGapMode {
    None,
    /// Against the waterfill optimum, any pool size.
    Proxy,
    /// Against the brute-force oracle; small pools only.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub child: Experiment,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default = "default_gap")]
    pub welfare_gap: WelfareGapMode,
}

fn default_gap() -> WelfareGapMode {
    WelfareGapMode::Proxy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "reference_params")]
    pub env: EnvParams,
    #[serde(default)]
    pub pool: PoolSpec,
    #[serde(default)]
    pub mode: Option<SchemeMode>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub classif: ClassifConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn reference_params() -> EnvParams {
    *LearningEnv::reference().params()
}

pub fn parse_scenario(text: &str) -> Result<Scenario, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Config(format!("scenario parse error: {e}")))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text).map_err(|e| e.context(path.display().to_string()))
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Scenario with every default filled in.
    pub scenario: Scenario,
    pub experiment: Experiment,
    pub env: LearningEnv,
    pub pool: Option<AgentPool>,
    pub seed: Option<u64>,
    pub mode: SchemeMode,
}

impl Resolved {
    /// Pool of `count` agents from the scenario's generator.
    pub fn generated_pool(&self, count: usize) -> Result<AgentPool, BenchError> {
        build_pool(&self.scenario.pool, Some(count), &self.env, self.seed)
    }
}

fn build_pool(
    spec: &PoolSpec,
    count: Option<usize>,
    env: &LearningEnv,
    fallback_seed: Option<u64>,
) -> Result<AgentPool, BenchError> {
    if let (Some(thetas), None) = (&spec.thetas, count) {
        return AgentPool::new(thetas.clone(), env).map_err(|e| match e {
            Error::TypesNotStrict { index, .. } => BenchError::Config(format!(
                "pool.thetas: types must be strictly increasing and distinct (strict type ordering), offending index {index}"
            )),
            other => BenchError::Model(other),
        });
    }
    let count = count
        .or(spec.count)
        .ok_or_else(|| BenchError::Config("pool: either `thetas` or `count` is required".into()))?;
    let low = spec.low.unwrap_or(env.theta_min());
    let high = spec.high.unwrap_or(env.theta_max());
    match spec.spacing.unwrap_or(Spacing::Even) {
        Spacing::Even => Ok(AgentPool::evenly_spaced(count, low, high, env)?),
        Spacing::Random => {
            let seed = spec
                .seed
                .or(fallback_seed)
                .ok_or_else(|| BenchError::Config("pool: random spacing needs `pool.seed` or `mc.seed`".into()))?;
            let bounded = env.with_type_bounds(low, high)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, count as u64, 0));
            let drawn = random_pool(&mut rng, count, &bounded)?;
            Ok(AgentPool::new(drawn.thetas().to_vec(), env)?)
        }
    }
}

impl Scenario {
    /// Validates the scenario for `experiment`, listing every violated
    /// constraint at once, then applies the seed override and defaults.
    pub fn resolve(&self, experiment: Experiment, seed_override: Option<u64>) -> Result<Resolved, BenchError> {
        let mut issues: Vec<String> = Vec::new();
        if let Some(declared) = self.experiment {
            if declared != experiment {
                issues.push(format!(
                    "experiment: scenario declares `{}` but `{}` was requested",
                    declared.as_str(),
                    experiment.as_str()
                ));
            }
        }
        let env = match LearningEnv::new(self.env) {
            Ok(env) => Some(env),
            Err(e) => {
                issues.push(format!("env: {e}"));
                None
            }
        };
        let mut scenario = self.clone();
        scenario.experiment = Some(experiment);
        if seed_override.is_some() {
            scenario.mc.seed = seed_override;
        }
        let seed = scenario.mc.seed;

        let sweep = match (experiment, &self.sweep) {
            (Experiment::Sweep, None) => {
                issues.push("sweep: section required for the sweep experiment".into());
                None
            }
            (Experiment::Sweep, Some(s)) => Some(s.clone()),
            _ => None,
        };
        let effective = sweep.as_ref().map_or(experiment, |s| s.child);
        if let Some(s) = &sweep {
            check_sweep(s, &self.pool, &mut issues);
        }
        let mode = self.mode.unwrap_or(effective.default_mode());
        scenario.mode = Some(mode);
        if matches!(effective, Experiment::Game | Experiment::Vcg | Experiment::Verify)
            && !matches!(mode, SchemeMode::ClosedForm | SchemeMode::BindingFixedPoint)
        {
            issues.push(format!("mode: {} supports closed_form or binding_fixed_point only", effective.as_str()));
        }
        if effective.is_stochastic() && seed.is_none() {
            issues.push("mc.seed: a seed is required for stochastic experiments (or pass --seed)".into());
        }
        check_grids(&self.grids, &mut issues);
        if effective == Experiment::Verify {
            check_verify(&self.verify, &self.mc, &mut issues);
        }
        if effective == Experiment::Estimate {
            check_classif(&self.classif, &mut issues);
        }

        let needs_pool = effective != Experiment::Estimate;
        let by_j = sweep.as_ref().is_some_and(|s| s.axis == SweepAxis::J);
        let mut pool = None;
        if let (true, Some(env)) = (needs_pool, &env) {
            if by_j {
                // validated per grid point when the sweep runs
                if self.pool.thetas.is_some() {
                    issues.push("pool: a sweep over j needs a generator (`count`/`spacing`), not `thetas`".into());
                }
            } else {
                match build_pool(&self.pool, None, env, seed) {
                    Ok(p) => pool = Some(p),
                    Err(e) => issues.push(e.to_string()),
                }
            }
        }
        if !issues.is_empty() {
            return Err(BenchError::Config(format!("invalid scenario:\n  - {}", issues.join("\n  - "))));
        }
        let env = env.expect("env validated");
        if effective == Experiment::Verify {
            max_q_floor(&env)?;
            if let Some(q) = self.verify.q_floor {
                crate::mechanism::q_floor(&env, Some(q))?;
            }
            if self.verify.eta.is_none() {
                scenario.verify.eta = Some(self.verify.eta_fraction * widened_floor_eta(&env)?);
            }
        }
        Ok(Resolved { scenario, experiment, env, pool, seed, mode })
    }
}

fn check_grids(g: &Grids, issues: &mut Vec<String>) {
    if g.declaration_size == 0 {
        issues.push("grids.declaration_size: must be at least 1".into());
    }
    if !(g.oracle_step > 0.0 && g.oracle_step.is_finite()) {
        issues.push(format!("grids.oracle_step: must be positive, got {}", g.oracle_step));
    }
    if g.max_rounds == 0 {
        issues.push("grids.max_rounds: must be at least 1".into());
    }
}

fn check_verify(v: &VerifyConfig, mc: &McConfig, issues: &mut Vec<String>) {
    if let Some(eta) = v.eta {
        if !(eta >= 0.0 && eta.is_finite()) {
            issues.push(format!("verify.eta: must be finite and nonnegative, got {eta}"));
        }
    }
    if !(v.eta_fraction >= 0.0 && v.eta_fraction.is_finite()) {
        issues.push(format!("verify.eta_fraction: must be finite and nonnegative, got {}", v.eta_fraction));
    }
    if mc.trials == 0 {
        issues.push("mc.trials: must be at least 1".into());
    }
    if mc.noise.is_empty() {
        issues.push("mc.noise: at least one noise model is required".into());
    }
}

fn check_classif(c: &ClassifConfig, issues: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&c.t_star) {
        issues.push(format!("classif.t_star: must lie in [0, 1], got {}", c.t_star));
    }
    if c.flip_probs.is_empty() {
        issues.push("classif.flip_probs: at least one agent is required".into());
    }
    for (i, p) in c.flip_probs.iter().enumerate() {
        if !(0.0..0.5).contains(p) {
            issues.push(format!("classif.flip_probs[{i}]: must lie in [0, 1/2), got {p}"));
        }
    }
    if c.q == 0 || c.q_prime == 0 {
        issues.push("classif.q, classif.q_prime: must be at least 1".into());
    }
    if !(c.delta > 0.0 && c.delta < 1.0) {
        issues.push(format!("classif.delta: must lie in (0, 1), got {}", c.delta));
    }
    if c.union_size == 0 {
        issues.push("classif.union_size: must be at least 1".into());
    }
    if c.trials == 0 {
        issues.push("classif.trials: must be at least 1".into());
    }
}

fn check_sweep(s: &SweepConfig, pool: &PoolSpec, issues: &mut Vec<String>) {
    if s.values.is_empty() {
        issues.push("sweep.values: at least one grid point is required".into());
    }
    let allowed = match s.axis {
        SweepAxis::J => &[Experiment::Scheme, Experiment::Game, Experiment::Vcg][..],
        SweepAxis::Eta => &[Experiment::Verify][..],
        SweepAxis::Q => &[Experiment::Estimate][..],
    };
    if !allowed.contains(&s.child) {
        issues.push(format!("sweep.child: `{}` cannot be swept along {:?}", s.child.as_str(), s.axis));
    }
    for v in &s.values {
        let ok = match s.axis {
            SweepAxis::J | SweepAxis::Q => *v >= 1.0 && v.fract() == 0.0 && *v < 1e9,
            SweepAxis::Eta => *v >= 0.0 && v.is_finite(),
        };
        if !ok {
            issues.push(format!("sweep.values: {v} is not a valid {:?} value", s.axis));
        }
    }
    if s.axis == SweepAxis::J && pool.count.is_some() {
        issues.push("pool.count: the sweep over j sets the pool size; omit `count`".into());
    }
}
