//! Threshold classifiers on the unit interval and the type estimator built on
//! them.
//!
//! The class is `{x ↦ σ·sign(x - s)}` over thresholds `s` and orientations
//! `σ = ±1`, with `sign(0) = +1`. It is closed under negation, so the
//! H-divergence between two samples can be computed either as a supremum of
//! risk differences or, after flipping one sample's labels, as one minus the
//! smallest sum of risks. Both scans run on integer error counts over a
//! common denominator and therefore agree bit for bit.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest point set handled by full sign enumeration.
pub const RADEMACHER_EXACT_MAX: usize = 20;
pub const RADEMACHER_MC_DRAWS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledSample {
    pub x: f64,
    /// `-1` or `+1`.
    pub y: i8,
}

impl LabeledSample {
    pub fn new(x: f64, y: i8) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid("x", format!("must lie in [0, 1], got {x}")));
        }
        if y != 1 && y != -1 {
            return Err(invalid("y", format!("labels are -1 or +1, got {y}")));
        }
        Ok(Self { x, y })
    }
}

/// `x ↦ orientation · sign(x - threshold)`; thresholds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub threshold: f64,
    pub orientation: i8,
}

impl Threshold {
    pub fn predict(&self, x: f64) -> i8 {
        let sign = if x - self.threshold >= 0.0 { 1 } else { -1 };
        self.orientation * sign
    }

    pub fn negated(&self) -> Self {
        Self { threshold: self.threshold, orientation: -self.orientation }
    }

    pub fn empirical_risk(&self, samples: &[LabeledSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let errors = samples.iter().filter(|s| self.predict(s.x) != s.y).count();
        Ok(errors as f64 / samples.len() as f64)
    }

    /// Risk under uniform `x` with labels given by the threshold `t_star`.
    pub fn target_risk(&self, t_star: f64) -> f64 {
        let s = self.threshold.clamp(0.0, 1.0);
        let disagreement = (s - t_star).abs();
        if self.orientation > 0 {
            disagreement
        } else {
            1.0 - disagreement
        }
    }
}

/// Uniform inputs, labels `sign(x - t_star)` flipped with probability `flip_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticAgentDist {
    pub t_star: f64,
    pub flip_prob: f64,
}

impl SyntheticAgentDist {
    pub fn new(t_star: f64, flip_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_star) {
            return Err(invalid("t_star", format!("must lie in [0, 1], got {t_star}")));
        }
        if !(0.0..0.5).contains(&flip_prob) {
            return Err(invalid("flip_prob", format!("must lie in [0, 1/2), got {flip_prob}")));
        }
        Ok(Self { t_star, flip_prob })
    }

    /// Population risk of `g` under this distribution: `(1 - 2p) R_0(g) + p`.
    pub fn risk(&self, g: &Threshold) -> f64 {
        (1.0 - 2.0 * self.flip_prob) * g.target_risk(self.t_star) + self.flip_prob
    }
}

/// `n` draws; draw `i` depends only on `(seed, i)`.
pub fn sample(dist: &SyntheticAgentDist, n: usize, seed: u64) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen();
            let clean = if x - dist.t_star >= 0.0 { 1 } else { -1 };
            let flip = rng.gen_bool(dist.flip_prob);
            LabeledSample { x, y: if flip { -clean } else { clean } }
        })
        .collect()
}

/// Type of a label-flip distribution relative to the clean one. The risk gap
/// `p |1 - 2 R_0(g)|` is largest at the Bayes classifier, where it equals `p`.
pub fn true_type(dist: &SyntheticAgentDist) -> f64 {
    dist.flip_prob
}

/// Sorted distinct inputs with per-value counts of `+1` and `-1` labels.
fn grouped(samples: &[LabeledSample]) -> Vec<(f64, u64, u64)> {
    let mut sorted: Vec<&LabeledSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for s in sorted {
        let (pos, neg) = if s.y > 0 { (1, 0) } else { (0, 1) };
        match groups.last_mut() {
            Some(g) if g.0 == s.x => {
                g.1 += pos;
                g.2 += neg;
            }
            _ => groups.push((s.x, pos, neg)),
        }
    }
    groups
}

/// Exact empirical risk minimiser over thresholds at `-inf`, midpoints of
/// consecutive distinct inputs and `+inf`, in both orientations. Ties go to
/// the smaller threshold, then to orientation `+1`.
pub fn erm_fit(samples: &[LabeledSample]) -> Result<(Threshold, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let groups = grouped(samples);
    let n = samples.len() as u64;
    let neg_total: u64 = groups.iter().map(|g| g.2).sum();
    let (mut pos_below, mut neg_below) = (0u64, 0u64);
    let mut best: Option<(Threshold, u64)> = None;
    for k in 0..=groups.len() {
        let threshold = match k {
            0 => f64::NEG_INFINITY,
            k if k == groups.len() => f64::INFINITY,
            k => 0.5 * (groups[k - 1].0 + groups[k].0),
        };
        // orientation +1 predicts -1 below the cut and +1 above it
        let plus = pos_below + (neg_total - neg_below);
        for (orientation, errors) in [(1i8, plus), (-1i8, n - plus)] {
            if best.is_none_or(|(_, e)| errors < e) {
                best = Some((Threshold { threshold, orientation }, errors));
            }
        }
        if k < groups.len() {
            pos_below += groups[k].1;
            neg_below += groups[k].2;
        }
    }
    let (g, errors) = best.expect("at least two candidates");
    Ok((g, errors as f64 / n as f64))
}

/// Error counts of orientation `+1` for two samples at every cut of their
/// merged distinct inputs (including both sentinels).
fn merged_cut_errors(a: &[LabeledSample], b: &[LabeledSample]) -> Vec<(u64, u64)> {
    let mut points: Vec<(f64, bool, i8)> = a
        .iter()
        .map(|s| (s.x, true, s.y))
        .chain(b.iter().map(|s| (s.x, false, s.y)))
        .collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0));
    let neg_a = a.iter().filter(|s| s.y < 0).count() as u64;
    let neg_b = b.iter().filter(|s| s.y < 0).count() as u64;
    let (mut pos_a, mut pos_b, mut below_neg_a, mut below_neg_b) = (0u64, 0u64, 0u64, 0u64);
    let mut cuts = vec![(neg_a, neg_b)];
    let mut i = 0;
    while i < points.len() {
        let x = points[i].0;
        while i < points.len() && points[i].0 == x {
            let (_, from_a, y) = points[i];
            match (from_a, y > 0) {
                (true, true) => pos_a += 1,
                (true, false) => below_neg_a += 1,
                (false, true) => pos_b += 1,
                (false, false) => below_neg_b += 1,
            }
            i += 1;
        }
        cuts.push((pos_a + neg_a - below_neg_a, pos_b + neg_b - below_neg_b));
    }
    cuts
}

fn check_nonempty(a: &[LabeledSample], b: &[LabeledSample]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(())
}

/// `sup_g |R̂_j(g) - R̂_0(g)|` over the threshold class.
pub fn h_divergence_sup_scan(samples_j: &[LabeledSample], samples_0: &[LabeledSample]) -> Result<f64> {
    check_nonempty(samples_j, samples_0)?;
    let (nj, n0) = (samples_j.len() as u64, samples_0.len() as u64);
    let mut best = 0u64;
    for (ej, e0) in merged_cut_errors(samples_j, samples_0) {
        for (ej, e0) in [(ej, e0), (nj - ej, n0 - e0)] {
            best = best.max((ej * n0).abs_diff(e0 * nj));
        }
    }
    Ok(best as f64 / (nj * n0) as f64)
}

/// `1 - inf_g {R̂_0(g) + R̂_j⁻(g)}` where `j⁻` is `samples_j` with labels flipped.
pub fn h_divergence_label_flip(samples_j: &[LabeledSample], samples_0: &[LabeledSample]) -> Result<f64> {
    check_nonempty(samples_j, samples_0)?;
    let flipped: Vec<LabeledSample> =
        samples_j.iter().map(|s| LabeledSample { x: s.x, y: -s.y }).collect();
    let (nj, n0) = (samples_j.len() as u64, samples_0.len() as u64);
    let mut least = u64::MAX;
    for (ef, e0) in merged_cut_errors(&flipped, samples_0) {
        for (ef, e0) in [(ef, e0), (nj - ef, n0 - e0)] {
            // risks normalised separately, summed over the common denominator
            least = least.min(ef * n0 + e0 * nj);
        }
    }
    Ok((nj * n0 - least) as f64 / (nj * n0) as f64)
}

/// Sizes of the groups of equal inputs, in increasing input order.
fn group_sizes(xs: &[f64]) -> Vec<usize> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes: Vec<usize> = Vec::new();
    let mut prev: Option<f64> = None;
    for x in sorted {
        if prev == Some(x) {
            *sizes.last_mut().expect("group exists") += 1;
        } else {
            sizes.push(1);
        }
        prev = Some(x);
    }
    sizes
}

/// `sup_g Σ σ_i g(x_i)` for one sign vector laid out group by group.
fn best_correlation(signs_by_group: impl Iterator<Item = i64>, total: i64) -> i64 {
    let mut best = total.abs();
    let mut prefix = 0i64;
    for s in signs_by_group {
        prefix += s;
        best = best.max((total - 2 * prefix).abs());
    }
    best
}

/// Exact empirical Rademacher complexity of the threshold class on `xs` by
/// enumerating all `2^n` sign vectors.
pub fn rademacher_exact(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n > RADEMACHER_EXACT_MAX {
        return Err(Error::TooLarge { what: "points for exact Rademacher", got: n, limit: RADEMACHER_EXACT_MAX });
    }
    let sizes = group_sizes(xs);
    let sum: i64 = (0u64..1 << n)
        .into_par_iter()
        .map(|mask| {
            let sign = |i: usize| if mask >> i & 1 == 1 { 1i64 } else { -1 };
            let total: i64 = (0..n).map(sign).sum();
            let mut start = 0;
            let per_group = sizes.iter().map(|&len| {
                let s: i64 = (start..start + len).map(sign).sum();
                start += len;
                s
            });
            best_correlation(per_group, total)
        })
        .sum();
    Ok(sum as f64 / n as f64 / (1u64 << n) as f64)
}

/// Monte Carlo estimate of the empirical Rademacher complexity.
pub fn rademacher_monte_carlo(xs: &[f64], draws: usize, seed: u64) -> Result<f64> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if draws == 0 {
        return Err(invalid("draws", "at least one draw is required"));
    }
    let sizes = group_sizes(xs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0i64;
    let mut signs = vec![0i64; n];
    for _ in 0..draws {
        for s in signs.iter_mut() {
            *s = if rng.gen::<bool>() { 1 } else { -1 };
        }
        let total: i64 = signs.iter().sum();
        let mut start = 0;
        let per_group = sizes.iter().map(|&len| {
            let s: i64 = signs[start..start + len].iter().sum();
            start += len;
            s
        });
        sum += best_correlation(per_group, total);
    }
    Ok(sum as f64 / n as f64 / draws as f64)
}

/// Exact value for small sets, Monte Carlo beyond [`RADEMACHER_EXACT_MAX`].
pub fn empirical_rademacher(xs: &[f64], seed: u64) -> Result<f64> {
    if xs.len() <= RADEMACHER_EXACT_MAX {
        rademacher_exact(xs)
    } else {
        rademacher_monte_carlo(xs, RADEMACHER_MC_DRAWS, seed)
    }
}

/// Parameterisation of the uniform deviation bound for the threshold class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacPreset {
    /// `alpha_delta = ln(1/delta)^(1/2)`, `gamma = 1`.
    #[serde(rename = "classif_unitrate")]
    #[default]
    UnitRate,
    /// `alpha_delta = (ln(1/delta)/2)^(1/2)`, `gamma = 1/2`.
    #[serde(rename = "classif_halfrate")]
    HalfRate,
}


impl PacPreset {
    pub fn alpha(&self, delta: f64) -> f64 {
        match self {
            PacPreset::UnitRate => (1.0 / delta).ln().sqrt(),
            PacPreset::HalfRate => ((1.0 / delta).ln() / 2.0).sqrt(),
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            PacPreset::UnitRate => 1.0,
            PacPreset::HalfRate => 0.5,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PacPreset::UnitRate => "classif_unitrate",
            PacPreset::HalfRate => "classif_halfrate",
        }
    }
}

/// `alpha [(1+q)^-gamma + (1+q')^-gamma] + 2 beta`.
pub fn eta_bound_with(alpha: f64, gamma: f64, beta: f64, q: u64, q_prime: u64) -> f64 {
    alpha * ((1.0 + q as f64).powf(-gamma) + (1.0 + q_prime as f64).powf(-gamma)) + 2.0 * beta
}

/// Estimation error bound holding simultaneously for `j_count` agents with
/// probability `1 - delta`: the preset's `alpha` at level `delta / (4 J)`,
/// with the Rademacher term in place of `beta`.
pub fn eta_bound(q: u64, q_prime: u64, delta: f64, j_count: usize, preset: PacPreset, rademacher: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if j_count == 0 {
        return Err(invalid("j_count", "at least one agent is required"));
    }
    let alpha = preset.alpha(delta / (4.0 * j_count as f64));
    Ok(eta_bound_with(alpha, preset.gamma(), rademacher, q, q_prime))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub trial: usize,
    pub agent: usize,
    pub theta: f64,
    pub theta_hat: f64,
    pub eta: f64,
    pub within: bool,
    pub q: u64,
    pub q_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub rows: Vec<EstimationReport>,
    pub within_fraction: f64,
    pub preset: PacPreset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub t_star: f64,
    pub flip_probs: Vec<f64>,
    pub q: u64,
    pub q_prime: u64,
    pub delta: f64,
    /// Union-bound size used in the bound (`1` for the per-agent guarantee).
    pub union_size: usize,
    pub preset: PacPreset,
    pub trials: usize,
    pub seed: u64,
}

/// Seed for stream `(a, b)` under a master seed (splitmix64 finaliser).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Repeatedly estimates every agent's type from `q` own samples and `q'`
/// clean samples and checks the estimate against the bound. The Rademacher
/// term is the empirical one on the realised clean sample.
pub fn coverage_experiment(config: &CoverageConfig) -> Result<CoverageSummary> {
    if config.q == 0 || config.q_prime == 0 {
        return Err(invalid("q", "q and q_prime must be at least 1"));
    }
    let dists: Vec<SyntheticAgentDist> = config
        .flip_probs
        .iter()
        .map(|&p| SyntheticAgentDist::new(config.t_star, p))
        .collect::<Result<_>>()?;
    let clean = SyntheticAgentDist::new(config.t_star, 0.0)?;
    let j_count = dists.len() as u64;
    let per_trial: Vec<(Vec<usize>, Vec<EstimationReport>)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let reference = sample(&clean, config.q_prime as usize, derive_seed(config.seed, trial as u64, j_count));
            let xs: Vec<f64> = reference.iter().map(|s| s.x).collect();
            let rows = dists
                .iter()
                .enumerate()
                .map(|(agent, dist)| {
                    let own = sample(dist, config.q as usize, derive_seed(config.seed, trial as u64, agent as u64));
                    let theta_hat = h_divergence_label_flip(&own, &reference)?;
                    Ok(EstimationReport {
                        trial,
                        agent,
                        theta: true_type(dist),
                        theta_hat,
                        eta: f64::NAN,
                        within: false,
                        q: config.q,
                        q_prime: config.q_prime,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((group_sizes(&xs), rows))
        })
        .collect::<Result<_>>()?;

    // The Rademacher term depends on the clean sample only through its
    // pattern of tied inputs, so it is computed once per pattern.
    let mut rad_cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut rows = Vec::with_capacity(config.trials * dists.len());
    for (sizes, trial_rows) in per_trial {
        let rad = match rad_cache.get(&sizes) {
            Some(&r) => r,
            None => {
                let xs: Vec<f64> =
                    sizes.iter().enumerate().flat_map(|(g, &len)| std::iter::repeat_n(g as f64, len)).collect();
                let r = empirical_rademacher(&xs, config.seed)?;
                rad_cache.insert(sizes, r);
                r
            }
        };
        let eta = eta_bound(config.q, config.q_prime, config.delta, config.union_size, config.preset, rad)?;
        for mut row in trial_rows {
            row.eta = eta;
            row.within = (row.theta_hat - row.theta).abs() <= eta;
            rows.push(row);
        }
    }
    let within = rows.iter().filter(|r| r.within).count();
    let within_fraction = if rows.is_empty() { 1.0 } else { within as f64 / rows.len() as f64 };
    Ok(CoverageSummary { rows, within_fraction, preset: config.preset })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, i8)]) -> Vec<LabeledSample> {
        v.iter().map(|&(x, y)| LabeledSample::new(x, y).unwrap()).collect()
    }

    /// O(n^2) ERM oracle: evaluate every candidate threshold directly.
    fn naive_erm(samples: &[LabeledSample]) -> (Threshold, f64) {
        let mut xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut cands = vec![f64::NEG_INFINITY];
        cands.extend(xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        cands.push(f64::INFINITY);
        let mut best: Option<(Threshold, f64)> = None;
        for s in cands {
            for o in [1i8, -1] {
                let g = Threshold { threshold: s, orientation: o };
                let r = g.empirical_risk(samples).unwrap();
                if best.is_none_or(|(_, b)| r < b) {
                    best = Some((g, r));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn separable_sample_has_zero_risk() {
        let s = pts(&[(0.1, -1), (0.3, -1), (0.6, 1), (0.9, 1)]);
        let (g, r) = erm_fit(&s).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(g, Threshold { threshold: 0.5 * (0.3 + 0.6), orientation: 1 });
    }

    #[test]
    fn single_positive_sample() {
        let (g, r) = erm_fit(&pts(&[(0.4, 1)])).unwrap();
        assert_eq!(r, 0.0);
        assert!(g.threshold < 0.4 && g.orientation == 1);
        assert_eq!(erm_fit(&[]), Err(Error::EmptySample));
    }

    #[test]
    fn erm_matches_naive_scan() {
        let dist = SyntheticAgentDist::new(0.4, 0.2).unwrap();
        for seed in 0..20 {
            let s = sample(&dist, 100, seed);
            assert_eq!(erm_fit(&s).unwrap(), naive_erm(&s));
        }
    }

    #[test]
    fn negation_complements_risk() {
        let s = sample(&SyntheticAgentDist::new(0.5, 0.3).unwrap(), 37, 3);
        for t in [f64::NEG_INFINITY, 0.2, 0.5, 0.77, f64::INFINITY] {
            let g = Threshold { threshold: t, orientation: 1 };
            let errors = |g: &Threshold| s.iter().filter(|p| g.predict(p.x) != p.y).count();
            assert_eq!(errors(&g) + errors(&g.negated()), s.len());
        }
    }

    #[test]
    fn sampling_basics() {
        let clean = SyntheticAgentDist::new(0.3, 0.0).unwrap();
        let s = sample(&clean, 500, 1);
        assert!(s.iter().all(|p| p.y == if p.x >= 0.3 { 1 } else { -1 }));
        assert!(sample(&clean, 0, 1).is_empty());
        let noisy = SyntheticAgentDist::new(0.3, 0.1).unwrap();
        let n = 100_000;
        let flips = sample(&noisy, n, 2)
            .iter()
            .filter(|p| p.y != if p.x >= 0.3 { 1 } else { -1 })
            .count() as f64;
        let sd = (n as f64 * 0.1 * 0.9).sqrt();
        assert!((flips - 0.1 * n as f64).abs() < 3.0 * sd);
        assert!(SyntheticAgentDist::new(0.3, 0.5).is_err());
    }

    #[test]
    fn sampling_prefix_is_stable() {
        let d = SyntheticAgentDist::new(0.5, 0.2).unwrap();
        assert_eq!(sample(&d, 10, 4)[..], sample(&d, 20, 4)[..10]);
    }

    #[test]
    fn true_type_matches_grid_supremum() {
        for p in [0.0, 0.06, 0.1] {
            let dist = SyntheticAgentDist::new(0.37, p).unwrap();
            let clean = SyntheticAgentDist::new(0.37, 0.0).unwrap();
            let mut sup: f64 = 0.0;
            for i in 0..=5000 {
                let s = i as f64 / 5000.0;
                for o in [1i8, -1] {
                    let g = Threshold { threshold: s, orientation: o };
                    sup = sup.max((dist.risk(&g) - clean.risk(&g)).abs());
                }
            }
            assert!((sup - true_type(&dist)).abs() < 1e-4);
        }
    }

    #[test]
    fn divergence_edge_cases() {
        let s = sample(&SyntheticAgentDist::new(0.5, 0.1).unwrap(), 40, 8);
        assert_eq!(h_divergence_sup_scan(&s, &s).unwrap(), 0.0);
        assert_eq!(h_divergence_label_flip(&s, &s).unwrap(), 0.0);
        let clean = sample(&SyntheticAgentDist::new(0.5, 0.0).unwrap(), 40, 9);
        let flipped: Vec<LabeledSample> = clean.iter().map(|p| LabeledSample { x: p.x, y: -p.y }).collect();
        assert_eq!(h_divergence_sup_scan(&flipped, &clean).unwrap(), 1.0);
        assert_eq!(h_divergence_label_flip(&flipped, &clean).unwrap(), 1.0);
        assert_eq!(h_divergence_sup_scan(&[], &clean), Err(Error::EmptySample));
    }

    #[test]
    fn sup_scan_matches_dense_grid() {
        let a = sample(&SyntheticAgentDist::new(0.5, 0.1).unwrap(), 50, 21);
        let b = sample(&SyntheticAgentDist::new(0.5, 0.0).unwrap(), 50, 22);
        let mut grid_best: f64 = 0.0;
        let mut cands: Vec<f64> = (0..=10_000).map(|i| i as f64 / 10_000.0).collect();
        cands.extend(a.iter().chain(&b).map(|p| p.x));
        cands.push(f64::INFINITY);
        for s in cands {
            for o in [1i8, -1] {
                let g = Threshold { threshold: s, orientation: o };
                grid_best = grid_best
                    .max((g.empirical_risk(&a).unwrap() - g.empirical_risk(&b).unwrap()).abs());
            }
        }
        let exact = h_divergence_sup_scan(&a, &b).unwrap();
        assert!((exact - grid_best).abs() < 1e-12, "{exact} vs {grid_best}");
    }

    /// Naive 2^n double loop over sign vectors and all candidate thresholds.
    fn naive_rademacher(xs: &[f64]) -> f64 {
        let n = xs.len();
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let mut cands = vec![f64::NEG_INFINITY];
        cands.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        cands.push(f64::INFINITY);
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let mut best = f64::NEG_INFINITY;
            for &s in &cands {
                for o in [1i8, -1] {
                    let g = Threshold { threshold: s, orientation: o };
                    let corr: f64 = (0..n)
                        .map(|i| {
                            let sigma = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                            sigma * g.predict(xs[i]) as f64
                        })
                        .sum();
                    best = best.max(corr / n as f64);
                }
            }
            total += best;
        }
        total / (1u64 << n) as f64
    }

    #[test]
    fn rademacher_small_cases() {
        assert_eq!(rademacher_exact(&[0.4]).unwrap(), 1.0);
        // two distinct points are shattered by thresholds with both orientations
        assert_eq!(rademacher_exact(&[0.2, 0.7]).unwrap(), 1.0);
        assert_eq!(naive_rademacher(&[0.2, 0.7]), 1.0);
        assert_eq!(rademacher_exact(&[0.5, 0.5]).unwrap(), 0.5);
        assert!(rademacher_exact(&[0.1; 21]).is_err());
    }

    #[test]
    fn rademacher_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=10 {
            let xs: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..6) as f64) / 6.0).collect();
            let exact = rademacher_exact(&xs).unwrap();
            let naive = naive_rademacher(&xs);
            assert!((exact - naive).abs() < 1e-12, "n={n}: {exact} vs {naive}");
        }
    }

    #[test]
    fn eta_bound_values() {
        let eta = eta_bound(9, 99, 0.05, 4, PacPreset::UnitRate, 0.0).unwrap();
        assert!((eta - 320f64.ln().sqrt() * 0.11).abs() < 1e-12);
        assert!((eta - 0.26419).abs() < 5e-6);
        let far = eta_bound(1_000_000_000, 1_000_000_000, 0.05, 4, PacPreset::UnitRate, 0.0).unwrap();
        assert!(far < 1e-8);
        let mut prev = f64::INFINITY;
        for q in 0..50 {
            let e = eta_bound(q, 99, 0.05, 4, PacPreset::HalfRate, 0.01).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn clean_agents_are_covered() {
        let report = coverage_experiment(&CoverageConfig {
            t_star: 0.5,
            flip_probs: vec![0.0, 0.0],
            q: 200,
            q_prime: 200,
            delta: 0.05,
            union_size: 1,
            preset: PacPreset::UnitRate,
            trials: 20,
            seed: 3,
        })
        .unwrap();
        assert_eq!(report.within_fraction, 1.0);
        assert!(report.rows.iter().all(|r| r.theta_hat < r.eta));
    }
}
