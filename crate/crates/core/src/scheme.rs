//! Full-information contribution schemes.
//!
//! Four solvers share one result type:
//!
//! * [`simplified_scheme`]: the closed-form scheme whose total is pinned to
//!   the relaxed optimum `N̄`, with the contributor count chosen by a
//!   prefix-sum consistency search ([`select_contributor_count`]).
//! * [`binding_scheme`] / [`binding_fixed_point_scheme`]: every contributor
//!   is held exactly at its participation constraint, solved by damped
//!   fixed-point iteration.
//! * [`brute_force_optimal_scheme`]: grid enumeration over memberships and
//!   contributions for `J <= 4`; the reference oracle.
//! * [`waterfill_optimal_scheme`]: the grand coalition with the lowest types
//!   saturated in order, optimised over the pooled total. Scales to any `J`
//!   and is checked against the oracle on small instances.
//!
//! Declared type vectors may arrive unsorted or with ties. They are stably
//! sorted, exact ties are separated by a deterministic `1e-12` step per rank,
//! and the resulting contributions are mapped back to the caller's order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::{welfare, AgentPool, ContributionScheme, LearningEnv};
use crate::error::{invalid, Error, Result};

/// Separation applied between exactly tied declared types inside the solver.
pub const TIE_JITTER: f64 = 1e-12;

const FP_DAMPING: f64 = 0.5;
const FP_MAX_ITER: usize = 10_000;
const FP_TOL: f64 = 1e-10;
const CROSSING_TOL: f64 = 1e-9;
const ORACLE_MAX_AGENTS: usize = 4;
const ORACLE_CAP_MARGIN: f64 = 1.1;
const WELFARE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    ClosedForm,
    BindingFixedPoint,
    BruteForce,
    Waterfill,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSolution {
    pub scheme: ContributionScheme,
    pub mode: SchemeMode,
    /// Largest gap `|n_j - n̄_j|` over contributors for the closed-form and
    /// binding modes; the grid step for the oracle.
    pub residual: f64,
    /// Whether the contributor count passed the prefix-sum consistency test.
    pub consistent: bool,
    pub l_star: usize,
    /// Weighted type implied by the closed-form sum identity, reported next to
    /// the weight-computed one (closed-form mode only).
    pub implied_weighted_type: Option<f64>,
}

/// Relaxed optimal pooled total for a coalition of `coalition_size` members:
/// `N̄ = (n° + 1) |B|^(1/(1+gamma)) - 1`.
pub fn target_total_samples(coalition_size: usize, env: &LearningEnv) -> f64 {
    let exponent = 1.0 / (1.0 + env.gamma());
    (env.outside_samples() + 1.0) * (coalition_size as f64).powf(exponent) - 1.0
}

/// Stable ascending order of a declared type vector, with ties separated.
#[derive(Debug, Clone)]
pub(crate) struct RankedTypes {
    order: Vec<usize>,
    sorted: Vec<f64>,
}

impl RankedTypes {
    pub(crate) fn new(types: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..types.len()).collect();
        order.sort_by(|&i, &j| types[i].total_cmp(&types[j]));
        let mut sorted: Vec<f64> = order.iter().map(|&i| types[i]).collect();
        for k in 1..sorted.len() {
            if sorted[k] <= sorted[k - 1] {
                sorted[k] = sorted[k - 1] + TIE_JITTER;
            }
        }
        Self { order, sorted }
    }

    pub(crate) fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Map values indexed by rank back to the caller's order.
    pub(crate) fn unsort(&self, ranked: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; ranked.len()];
        for (rank, &original) in self.order.iter().enumerate() {
            out[original] = ranked[rank];
        }
        out
    }
}

fn check_types(types: &[f64]) -> Result<()> {
    if types.is_empty() {
        return Err(invalid("types", "at least one declared type is required"));
    }
    if types.iter().any(|t| !t.is_finite()) {
        return Err(invalid("types", "declared types must be finite"));
    }
    Ok(())
}

/// Closed-form contributions for `l` contributors over sorted types.
fn closed_form_contributions(sorted: &[f64], l: usize, env: &LearningEnv) -> Vec<f64> {
    let n_bar = target_total_samples(sorted.len(), env);
    let mean = sorted[..l].iter().sum::<f64>() / l as f64;
    let slope = 2.0 * env.ratio();
    sorted
        .iter()
        .enumerate()
        .map(|(j, &theta)| if j < l { n_bar / l as f64 + slope * (theta - mean) } else { 0.0 })
        .collect()
}

/// Pooled total and weighted type of a ranked contribution vector.
fn pooled(sorted: &[f64], contributions: &[f64]) -> Option<(f64, f64)> {
    let total: f64 = contributions.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let weighted: f64 = contributions.iter().zip(sorted).map(|(n, t)| n * t).sum();
    Some((total, weighted / total))
}

/// `n̄_k` for every agent at the coalition defined by `contributions`.
fn max_contributions(sorted: &[f64], contributions: &[f64], env: &LearningEnv) -> Option<Vec<f64>> {
    let (total, vartheta) = pooled(sorted, contributions)?;
    let excess = env.risk_excess(vartheta, total);
    Some(sorted.iter().map(|&t| env.max_contribution_at(excess, t)).collect())
}

/// One-based index at which prefix sums of `caps` first reach `target`.
fn crossing_index(caps: &[f64], target: f64) -> Option<usize> {
    let threshold = target - CROSSING_TOL * target.abs().max(1.0);
    let mut prefix = 0.0;
    for (k, cap) in caps.iter().enumerate() {
        prefix += cap;
        if prefix >= threshold {
            return Some(k + 1);
        }
    }
    None
}

fn contributor_residual(contributions: &[f64], caps: &[f64], l: usize) -> f64 {
    contributions[..l].iter().zip(&caps[..l]).map(|(n, c)| (n - c).abs()).fold(0.0, f64::max)
}

fn select_on_sorted(sorted: &[f64], env: &LearningEnv) -> (usize, bool) {
    let n_bar = target_total_samples(sorted.len(), env);
    let mut fallback = 1;
    for l in 1..=sorted.len() {
        let contributions = closed_form_contributions(sorted, l, env);
        if contributions[..l].iter().any(|&n| n < 0.0) {
            continue;
        }
        fallback = l;
        let Some(caps) = max_contributions(sorted, &contributions, env) else {
            continue;
        };
        if crossing_index(&caps, n_bar) == Some(l) {
            return (l, true);
        }
    }
    (fallback, false)
}

/// Number of contributors of the closed-form scheme.
///
/// Returns the smallest `L` whose closed-form contributions are nonnegative
/// and whose maximum-contribution prefix sums first reach `N̄` exactly at
/// `L`. When no candidate passes, the largest `L` with nonnegative
/// contributions is returned together with `false`.
pub fn select_contributor_count(types: &[f64], env: &LearningEnv) -> Result<(usize, bool)> {
    check_types(types)?;
    let ranked = RankedTypes::new(types);
    Ok(select_on_sorted(ranked.sorted(), env))
}

/// Closed-form simplified scheme over a (possibly unsorted) declared type
/// vector. All agents are members; the `L*` lowest declared types contribute
/// `N̄/L* + (2a/c)(theta_j - mean)`, everybody else contributes nothing.
pub fn simplified_scheme(types: &[f64], env: &LearningEnv) -> Result<SchemeSolution> {
    check_types(types)?;
    let ranked = RankedTypes::new(types);
    let sorted = ranked.sorted();
    let (l, consistent) = select_on_sorted(sorted, env);
    let contributions = closed_form_contributions(sorted, l, env);
    let caps = max_contributions(sorted, &contributions, env).ok_or(Error::EmptyCoalition)?;
    let residual = contributor_residual(&contributions, &caps, l);

    let n_out = env.outside_samples();
    let n_bar = target_total_samples(sorted.len(), env);
    let mean = sorted[..l].iter().sum::<f64>() / l as f64;
    let implied = mean
        - env.alpha_delta() * ((1.0 + n_bar).powf(-env.gamma()) - (1.0 + n_out).powf(-env.gamma()))
        + (n_out - n_bar / l as f64) / (2.0 * env.ratio());

    let samples = ranked.unsort(&contributions).into_iter().map(|n| n.max(0.0)).collect();
    Ok(SchemeSolution {
        scheme: ContributionScheme::grand(samples)?,
        mode: SchemeMode::ClosedForm,
        residual,
        consistent,
        l_star: l,
        implied_weighted_type: Some(implied),
    })
}

/// Binding solution over sorted types with `l` contributors:
/// ranked contributions and residual.
fn binding_on_sorted(sorted: &[f64], l: usize, env: &LearningEnv) -> Result<(Vec<f64>, f64)> {
    let mut contributions = vec![0.0; sorted.len()];
    if l == 1 {
        // A lone contributor at its own type is held to its outside option
        // exactly when it draws n°.
        contributions[0] = env.outside_samples();
        return Ok((contributions, 0.0));
    }
    let types = &sorted[..l];
    let mut total = l as f64 * env.contribution_cap().max(env.outside_samples());
    let mut vartheta = types.iter().sum::<f64>() / l as f64;
    let mut converged = false;
    let mut last_step = f64::INFINITY;
    for _ in 0..FP_MAX_ITER {
        let excess = env.risk_excess(vartheta, total);
        let mut new_total = 0.0;
        let mut weighted = 0.0;
        for &t in types {
            let n = env.max_contribution_at(excess, t);
            new_total += n;
            weighted += n * t;
        }
        if !(new_total > 0.0) {
            return Err(Error::InfeasibleContributors {
                contributors: l,
                reason: "pooled total collapsed to zero".into(),
            });
        }
        let next_vartheta = (1.0 - FP_DAMPING) * vartheta + FP_DAMPING * (weighted / new_total);
        let step = (new_total - total).abs().max((next_vartheta - vartheta).abs());
        total = new_total;
        vartheta = next_vartheta;
        last_step = step;
        if step < FP_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: FP_MAX_ITER, residual: last_step });
    }
    let excess = env.risk_excess(vartheta, total);
    for (n, &t) in contributions.iter_mut().zip(types) {
        *n = env.max_contribution_at(excess, t);
    }
    let min = contributions[..l].iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::InfeasibleContributors {
            contributors: l,
            reason: format!("lowest contribution at the fixed point is {min}"),
        });
    }
    let caps = max_contributions(sorted, &contributions, env).ok_or(Error::EmptyCoalition)?;
    Ok((contributions.clone(), contributor_residual(&contributions, &caps, l)))
}

/// Scheme in which the `l` lowest declared types contribute exactly their
/// maximum admissible amount `n̄_j` at the resulting coalition.
pub fn binding_fixed_point_scheme(
    types: &[f64],
    l: usize,
    env: &LearningEnv,
) -> Result<SchemeSolution> {
    check_types(types)?;
    if l == 0 || l > types.len() {
        return Err(invalid("l", format!("must lie in 1..={}, got {l}", types.len())));
    }
    let ranked = RankedTypes::new(types);
    let (contributions, residual) = binding_on_sorted(ranked.sorted(), l, env)?;
    let caps = max_contributions(ranked.sorted(), &contributions, env).ok_or(Error::EmptyCoalition)?;
    let consistent = crossing_index(&caps, target_total_samples(types.len(), env)) == Some(l);
    Ok(SchemeSolution {
        scheme: ContributionScheme::grand(ranked.unsort(&contributions))?,
        mode: SchemeMode::BindingFixedPoint,
        residual,
        consistent,
        l_star: l,
        implied_weighted_type: None,
    })
}

/// Binding scheme with its contributor count chosen by the same prefix-sum
/// rule as the closed form: the smallest feasible `l` for which the prefix
/// sums of `n̄` first reach `N̄` at `l`. Falls back to the largest feasible
/// `l` (flagged inconsistent).
pub fn binding_scheme(types: &[f64], env: &LearningEnv) -> Result<SchemeSolution> {
    check_types(types)?;
    let ranked = RankedTypes::new(types);
    let sorted = ranked.sorted();
    let n_bar = target_total_samples(sorted.len(), env);
    let mut fallback: Option<(usize, Vec<f64>, f64)> = None;
    let mut last_err = None;
    for l in 1..=sorted.len() {
        match binding_on_sorted(sorted, l, env) {
            Ok((contributions, residual)) => {
                let caps = max_contributions(sorted, &contributions, env)
                    .ok_or(Error::EmptyCoalition)?;
                if crossing_index(&caps, n_bar) == Some(l) {
                    return Ok(SchemeSolution {
                        scheme: ContributionScheme::grand(ranked.unsort(&contributions))?,
                        mode: SchemeMode::BindingFixedPoint,
                        residual,
                        consistent: true,
                        l_star: l,
                        implied_weighted_type: None,
                    });
                }
                fallback = Some((l, contributions, residual));
            }
            Err(e) => last_err = Some(e),
        }
    }
    match fallback {
        Some((l, contributions, residual)) => Ok(SchemeSolution {
            scheme: ContributionScheme::grand(ranked.unsort(&contributions))?,
            mode: SchemeMode::BindingFixedPoint,
            residual,
            consistent: false,
            l_star: l,
            implied_weighted_type: None,
        }),
        None => Err(last_err.unwrap_or(Error::EmptyCoalition)),
    }
}

/// Scheme for `mode` over declared types; only the closed-form and binding
/// modes are available from declarations alone.
pub fn scheme_for_mode(types: &[f64], mode: SchemeMode, env: &LearningEnv) -> Result<SchemeSolution> {
    match mode {
        SchemeMode::ClosedForm => simplified_scheme(types, env),
        SchemeMode::BindingFixedPoint => binding_scheme(types, env),
        SchemeMode::BruteForce | SchemeMode::Waterfill => Err(invalid(
            "mode",
            "only closed_form and binding_fixed_point schemes can be computed from declarations",
        )),
    }
}

/// Largest contribution considered by the oracle: the a-priori bound on
/// `n̄_j` plus a 10% margin.
pub fn oracle_contribution_cap(env: &LearningEnv) -> f64 {
    ORACLE_CAP_MARGIN * env.contribution_cap()
}

#[derive(Debug, Clone, Copy)]
struct GridCandidate {
    welfare: f64,
    mask: usize,
    code: usize,
}

/// Exhaustive welfare maximisation over memberships and a uniform grid of
/// contributions `{0, step, 2 step, ...} ∩ [0, n_cap]` (plus `n°`) under every
/// member's participation constraint. Refuses pools larger than four agents.
pub fn brute_force_optimal_scheme(
    pool: &AgentPool,
    env: &LearningEnv,
    grid_step: f64,
) -> Result<SchemeSolution> {
    let j_count = pool.len();
    if j_count > ORACLE_MAX_AGENTS {
        return Err(Error::TooLarge { what: "agents for the oracle", got: j_count, limit: ORACLE_MAX_AGENTS });
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(invalid("grid_step", format!("must be positive, got {grid_step}")));
    }
    let thetas = pool.thetas();
    let cap = oracle_contribution_cap(env);
    // Uniform grid plus the standalone draw n°, at which a member exactly
    // replicates its outside option.
    let mut levels: Vec<f64> =
        (0..=(cap / grid_step).floor() as usize).map(|k| k as f64 * grid_step).collect();
    let n_out = env.outside_samples();
    if levels.iter().all(|&v| v != n_out) {
        levels.push(n_out);
        levels.sort_by(f64::total_cmp);
    }
    let levels = &levels;
    let points = levels.len();
    let outside: Vec<f64> = thetas.iter().map(|&t| env.outside_utility(t)).collect();
    let outside_excess: Vec<f64> =
        thetas.iter().map(|&t| env.risk_excess(t, env.outside_samples())).collect();

    let empty = GridCandidate { welfare: outside.iter().sum(), mask: 0, code: 0 };

    let mut candidates: Vec<GridCandidate> = (1usize..(1 << j_count))
        .flat_map(|mask| (0..points).map(move |first| (mask, first)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|(mask, first)| {
            let members: Vec<usize> = (0..j_count).filter(|j| mask & (1 << j) != 0).collect();
            let rest = members.len() - 1;
            let combos = points.pow(rest as u32);
            let outside_rest: f64 =
                (0..j_count).filter(|j| mask & (1 << j) == 0).map(|j| outside[j]).sum();
            let mut best: Option<GridCandidate> = None;
            let mut n = vec![0.0; members.len()];
            for tail in 0..combos {
                let code = first * combos + tail;
                let mut digits = code;
                for slot in (0..members.len()).rev() {
                    n[slot] = levels[digits % points];
                    digits /= points;
                }
                let total: f64 = n.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                let weighted: f64 = members.iter().zip(&n).map(|(&j, &nj)| nj * thetas[j]).sum();
                let excess = env.risk_excess(weighted / total, total);
                // n_j <= n̄_j  <=>  u_j >= o_j
                let feasible = members.iter().zip(&n).all(|(&j, &nj)| {
                    nj <= env.outside_samples() - env.ratio() * (excess - outside_excess[j]) + 1e-12
                });
                if !feasible {
                    continue;
                }
                let value = -env.a() * members.len() as f64 * (env.r_star() + excess)
                    - env.c() * total
                    + outside_rest;
                if best.is_none_or(|b| value > b.welfare) {
                    best = Some(GridCandidate { welfare: value, mask, code });
                }
            }
            best
        })
        .collect();
    candidates.insert(0, empty);
    let best = candidates
        .into_iter()
        .reduce(|acc, c| {
            // near-ties go to the larger coalition
            let tol = WELFARE_TIE_TOL * acc.welfare.abs().max(1.0);
            let larger = c.mask.count_ones() > acc.mask.count_ones();
            if c.welfare > acc.welfare + tol || (c.welfare >= acc.welfare - tol && larger) {
                c
            } else {
                acc
            }
        })
        .expect("the empty coalition is always a candidate");

    let mut members = vec![false; j_count];
    let mut samples = vec![0.0; j_count];
    let member_idx: Vec<usize> = (0..j_count).filter(|j| best.mask & (1 << j) != 0).collect();
    let mut digits = best.code;
    for &j in member_idx.iter().rev() {
        samples[j] = levels[digits % points];
        digits /= points;
    }
    for &j in &member_idx {
        members[j] = true;
    }
    let scheme = ContributionScheme::new(members, samples)?;
    let l_star = scheme.contributor_count();
    Ok(SchemeSolution {
        scheme,
        mode: SchemeMode::BruteForce,
        residual: grid_step,
        consistent: true,
        l_star,
        implied_weighted_type: None,
    })
}

/// Greedy fill at a fixed pooled total: agents `0..l-1` saturate `n̄_j`, agent
/// `l-1` takes the remainder within its own cap. Among admissible `l`, the
/// one with the lowest weighted type is kept. Returns ranked contributions.
fn waterfill_at(sorted: &[f64], total: f64, env: &LearningEnv) -> Option<(Vec<f64>, f64)> {
    let slope = 2.0 * env.ratio();
    let n_out = env.outside_samples();
    let gamma = env.gamma();
    let base = n_out - slope * env.alpha_delta() * ((1.0 + total).powf(-gamma) - (1.0 + n_out).powf(-gamma));
    let tol = 1e-9 * total.max(1.0);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let (mut s1, mut s2) = (0.0, 0.0);
    for l in 1..=sorted.len() {
        let saturated = (l - 1) as f64;
        let last = sorted[l - 1];
        // Solve the linear system for the common intercept K of n_j = K + slope*theta_j.
        let denom = s1 - saturated * last + total / slope;
        if denom.abs() > 0.0 {
            let k = (total * base / slope - slope * s2 - last * total + last * slope * s1) / denom;
            let mut contributions = vec![0.0; sorted.len()];
            for j in 0..l - 1 {
                contributions[j] = k + slope * sorted[j];
            }
            let partial = total - (saturated * k + slope * s1);
            contributions[l - 1] = partial;
            let cap_last = k + slope * last;
            let ok = contributions[..l - 1].iter().all(|&n| n >= -tol)
                && partial >= -tol
                && partial <= cap_last + tol;
            if ok {
                for n in &mut contributions {
                    *n = n.max(0.0);
                }
                if let Some((_, vt)) = pooled(sorted, &contributions) {
                    if best.as_ref().is_none_or(|(_, b)| vt < *b) {
                        best = Some((contributions, vt));
                    }
                }
            }
        }
        s1 += sorted[l - 1];
        s2 += sorted[l - 1] * sorted[l - 1];
    }
    best
}

/// Welfare-optimal grand-coalition scheme with contributors saturated in
/// increasing type order, maximised over the pooled total by a dense scan
/// followed by golden-section refinement.
pub fn waterfill_optimal_scheme(pool: &AgentPool, env: &LearningEnv) -> Result<SchemeSolution> {
    let sorted = pool.thetas();
    let j_count = sorted.len();
    if j_count == 1 {
        // The only admissible total for a lone member is its standalone draw.
        return Ok(SchemeSolution {
            scheme: ContributionScheme::grand(vec![env.outside_samples()])?,
            mode: SchemeMode::Waterfill,
            residual: 0.0,
            consistent: true,
            l_star: 1,
            implied_weighted_type: None,
        });
    }
    let objective = |total: f64| -> f64 {
        match waterfill_at(sorted, total, env) {
            Some((_, vt)) => {
                -env.a() * j_count as f64 * (env.r_star() + env.risk_excess(vt, total))
                    - env.c() * total
            }
            None => f64::NEG_INFINITY,
        }
    };
    let upper = j_count as f64 * env.contribution_cap();
    const SCAN: usize = 4000;
    let step = upper / SCAN as f64;
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 1..=SCAN {
        let v = objective(i as f64 * step);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    if !best_val.is_finite() {
        return Err(Error::InfeasibleContributors {
            contributors: j_count,
            reason: "no admissible pooled total".into(),
        });
    }
    let (mut lo, mut hi) = ((best_idx as f64 - 1.0) * step, (best_idx as f64 + 1.0) * step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 * upper {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    let mut total = 0.5 * (lo + hi);
    if objective(total) < best_val {
        total = best_idx as f64 * step;
    }
    let (contributions, _) = waterfill_at(sorted, total, env).ok_or(Error::EmptyCoalition)?;
    let caps = max_contributions(sorted, &contributions, env).ok_or(Error::EmptyCoalition)?;
    let scheme = ContributionScheme::grand(contributions.clone())?;
    let l_star = scheme.contributor_count();
    let residual = contributor_residual(&contributions, &caps, l_star.saturating_sub(1));
    Ok(SchemeSolution {
        scheme,
        mode: SchemeMode::Waterfill,
        residual,
        consistent: true,
        l_star,
        implied_weighted_type: None,
    })
}

/// `W(oracle) - W(simplified)` on a pool small enough for the oracle.
pub fn welfare_gap(pool: &AgentPool, env: &LearningEnv, grid_step: f64) -> Result<f64> {
    let oracle = brute_force_optimal_scheme(pool, env, grid_step)?;
    let simplified = simplified_scheme(pool.thetas(), env)?;
    Ok(welfare(&oracle.scheme, pool, env)? - welfare(&simplified.scheme, pool, env)?)
}

/// `W(waterfill optimum) - W(simplified)`; usable at any pool size.
pub fn welfare_gap_proxy(pool: &AgentPool, env: &LearningEnv) -> Result<f64> {
    let optimum = waterfill_optimal_scheme(pool, env)?;
    let simplified = simplified_scheme(pool.thetas(), env)?;
    Ok(welfare(&optimum.scheme, pool, env)? - welfare(&simplified.scheme, pool, env)?)
}
