//! Randomised properties of the model, solvers and estimators.

use collab_incentives::classif::{
    erm_fit, h_divergence_label_flip, h_divergence_sup_scan, rademacher_exact, rademacher_monte_carlo, sample,
    LabeledSample, SyntheticAgentDist, Threshold,
};
use collab_incentives::instances::{random_env, random_pool, EnvRanges};
use collab_incentives::mechanism::{vcg_transfers, Verifier};
use collab_incentives::{
    agent_utility, simplified_scheme, target_total_samples, welfare, AgentPool, LearningEnv, SchemeMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, count: usize, ranges: &EnvRanges) -> (LearningEnv, AgentPool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = random_env(&mut rng, ranges).unwrap();
    let pool = random_pool(&mut rng, count, &env).unwrap();
    (env, pool)
}

fn labeled(points: Vec<(u8, bool)>, levels: u8) -> Vec<LabeledSample> {
    points
        .into_iter()
        .map(|(x, y)| LabeledSample::new(f64::from(x % levels) / f64::from(levels), if y { 1 } else { -1 }).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn divergence_estimators_agree_with_ties(
        a in prop::collection::vec((any::<u8>(), any::<bool>()), 1..40),
        b in prop::collection::vec((any::<u8>(), any::<bool>()), 1..40),
        levels in 1u8..6,
    ) {
        let (a, b) = (labeled(a, levels), labeled(b, levels));
        prop_assert_eq!(h_divergence_sup_scan(&a, &b).unwrap(), h_divergence_label_flip(&a, &b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_sums_to_pooled_target(seed in any::<u64>(), count in 1usize..15) {
        let (env, pool) = instance(seed, count, &EnvRanges::default());
        let sol = simplified_scheme(pool.thetas(), &env).unwrap();
        let sum: f64 = sol.scheme.samples().iter().sum();
        prop_assert!((sum - target_total_samples(count, &env)).abs() <= 1e-9);
        prop_assert!(sol.scheme.samples().iter().all(|&n| n >= 0.0));
    }

    #[test]
    fn bayes_risk_shifts_utilities_only(seed in any::<u64>(), count in 2usize..6, shift in 0.0f64..0.5) {
        let (env, pool) = instance(seed, count, &EnvRanges::default());
        let shifted = env.with_r_star(env.r_star() + shift).unwrap();
        let base = simplified_scheme(pool.thetas(), &env).unwrap();
        let moved = simplified_scheme(pool.thetas(), &shifted).unwrap();
        prop_assert_eq!(&base.scheme, &moved.scheme);
        let dw = welfare(&moved.scheme, &pool, &shifted).unwrap() - welfare(&base.scheme, &pool, &env).unwrap();
        prop_assert!((dw + env.a() * shift * count as f64).abs() <= 1e-8 * dw.abs().max(1.0));
        let t0 = vcg_transfers(pool.thetas(), &pool, &env, SchemeMode::ClosedForm).unwrap().transfers;
        let t1 = vcg_transfers(pool.thetas(), &pool, &shifted, SchemeMode::ClosedForm).unwrap().transfers;
        for (x, y) in t0.iter().zip(&t1) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_members_never_lose(seed in any::<u64>(), count in 1usize..10) {
        let (env, pool) = instance(seed, count, &EnvRanges::default());
        let sol = simplified_scheme(pool.thetas(), &env).unwrap();
        for j in 0..count {
            let u = agent_utility(j, &sol.scheme, &pool, &env).unwrap();
            prop_assert!(u >= env.outside_utility(pool.thetas()[j]) - 1e-9);
        }
    }

    #[test]
    fn truthful_estimates_keep_the_grand_coalition(seed in any::<u64>(), count in 1usize..7) {
        let (env, pool) = instance(seed, count, &EnvRanges::verifiable());
        let v = Verifier::new(&pool, &env, 0.0).unwrap();
        prop_assert!(v.grand_coalition_nash(pool.thetas()).unwrap().0);
    }

    #[test]
    fn negated_classifier_has_complementary_risk(
        points in prop::collection::vec((any::<u8>(), any::<bool>()), 1..50),
        s in -0.5f64..1.5,
    ) {
        let samples = labeled(points, 7);
        let g = Threshold { threshold: s, orientation: 1 };
        let r = g.empirical_risk(&samples).unwrap();
        let rn = g.negated().empirical_risk(&samples).unwrap();
        let n = samples.len() as f64;
        prop_assert_eq!((r * n).round() + (rn * n).round(), n);
    }

    #[test]
    fn erm_is_never_beaten_by_a_sample_threshold(
        points in prop::collection::vec((any::<u8>(), any::<bool>()), 1..50),
    ) {
        let samples = labeled(points, 11);
        let (_, best) = erm_fit(&samples).unwrap();
        for p in &samples {
            for orientation in [1, -1] {
                let g = Threshold { threshold: p.x, orientation };
                prop_assert!(g.empirical_risk(&samples).unwrap() >= best);
            }
        }
    }
}

#[test]
fn rademacher_enumeration_matches_monte_carlo() {
    let xs: Vec<f64> = (0..20).map(|i| f64::from(i) / 20.0).collect();
    let exact = rademacher_exact(&xs).unwrap();
    let draws = 100_000;
    let mc = rademacher_monte_carlo(&xs, draws, 17).unwrap();
    // per-draw values lie in [0, 1]
    let sd = 0.5 / (draws as f64).sqrt();
    assert!((exact - mc).abs() < 3.0 * sd, "exact {exact} vs MC {mc}");
}

#[test]
fn type_estimates_converge() {
    let clean = SyntheticAgentDist::new(0.5, 0.0).unwrap();
    for p in [0.0, 0.02, 0.04, 0.06] {
        let dist = SyntheticAgentDist::new(0.5, p).unwrap();
        let mut errors: Vec<f64> = (0..21)
            .map(|t| {
                let own = sample(&dist, 10_000, 2 * t);
                let reference = sample(&clean, 10_000, 2 * t + 1);
                (h_divergence_label_flip(&own, &reference).unwrap() - p).abs()
            })
            .collect();
        errors.sort_by(f64::total_cmp);
        assert!(errors[10] < 0.02, "p = {p}: median error {}", errors[10]);
    }
}
