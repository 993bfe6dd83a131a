//! Experiment bodies. Each returns its result tables and a JSON block of
//! results; `execute` stamps headers and assembles the report.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::scenario::{Resolved, SweepAxis, SweepConfig, WelfareGapMode};
use super::table::{Cell, Table};
use super::{BenchError, Derived, Report};
use crate::classif::{coverage_experiment, CoverageConfig, CoverageSummary};
use crate::econ::{agent_utility, welfare, AgentPool, LearningEnv};
use crate::game::{ActionProfile, DeclarationGrid, NaiveGame};
use crate::mechanism::{
    check_positive_transfer, max_q_floor, vcg_transfers, widened_floor_eta, MonteCarloReport, Verifier,
};
use crate::scheme::{
    brute_force_optimal_scheme, scheme_for_mode, simplified_scheme, target_total_samples,
    waterfill_optimal_scheme, welfare_gap, welfare_gap_proxy, SchemeMode, SchemeSolution,
};
use super::scenario::Experiment;

struct Outputs {
    results: Value,
    tables: Vec<Table>,
}

type Res<T> = Result<T, BenchError>;

pub(super) fn execute(r: &Resolved) -> Res<Report> {
    let derived = derive(r);
    let out = match r.experiment {
        Experiment::Scheme => scheme(r, pool(r)?)?,
        Experiment::Game => game(r, pool(r)?)?,
        Experiment::Vcg => vcg(r, pool(r)?)?,
        Experiment::Verify => verify(r, pool(r)?)?,
        Experiment::Estimate => estimate(r)?,
        Experiment::Sweep => sweep(r)?,
    };
    let scenario_json = serde_json::to_string(&r.scenario).expect("scenario serialises");
    let derived_json = serde_json::to_string(&derived).expect("derived constants serialise");
    let mut files = Vec::new();
    for t in &out.tables {
        let header = vec![
            format!("collab-bench {} {}", r.experiment.as_str(), t.name),
            format!("scenario: {scenario_json}"),
            format!("derived: {derived_json}"),
        ];
        files.push((t.name.clone(), t.render(&header)));
    }
    let mut names: Vec<&str> = out.tables.iter().map(|t| t.name.as_str()).collect();
    names.push("summary.json");
    let summary = json!({
        "experiment": r.experiment.as_str(),
        "scenario": r.scenario,
        "derived": derived,
        "results": out.results,
        "files": names,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    text.push('\n');
    files.push(("summary.json".to_string(), text));
    Ok(Report { files, summary })
}

fn pool(r: &Resolved) -> Res<&AgentPool> {
    r.pool.as_ref().ok_or_else(|| BenchError::Config("pool: required for this experiment".into()))
}

fn derive(r: &Resolved) -> Derived {
    let env = &r.env;
    let bound = env.outside_samples() - 2.0 * env.ratio() * (env.theta_max() - env.theta_min());
    let q_floor = max_q_floor(env).ok().map(|max| r.scenario.verify.q_floor.unwrap_or(max));
    let pool = r.pool.as_ref();
    Derived {
        ratio_a_over_c: env.ratio(),
        outside_samples: env.outside_samples(),
        agents: pool.map(AgentPool::len),
        pooled_target: pool.map(|p| target_total_samples(p.len(), env)),
        l_star: pool.and_then(|p| simplified_scheme(p.thetas(), env).ok()).map(|s| s.l_star),
        q_floor_bound: bound,
        q_floor,
        widened_floor_eta: widened_floor_eta(env).ok(),
        eta: r.scenario.verify.eta.filter(|_| {
            r.experiment == Experiment::Verify
                || r.scenario.sweep.as_ref().is_some_and(|s| s.child == Experiment::Verify)
        }),
    }
}

fn solve(r: &Resolved, pool: &AgentPool, env: &LearningEnv) -> Res<SchemeSolution> {
    Ok(match r.mode {
        SchemeMode::ClosedForm | SchemeMode::BindingFixedPoint => scheme_for_mode(pool.thetas(), r.mode, env)?,
        SchemeMode::BruteForce => brute_force_optimal_scheme(pool, env, r.scenario.grids.oracle_step)?,
        SchemeMode::Waterfill => waterfill_optimal_scheme(pool, env)?,
    })
}

fn scheme(r: &Resolved, pool: &AgentPool) -> Res<Outputs> {
    let env = &r.env;
    let sol = solve(r, pool, env)?;
    let mut t = Table::new(
        "scheme.csv",
        &["agent", "theta", "member", "samples", "utility", "outside_utility", "participation_slack"],
    );
    for (j, &theta) in pool.thetas().iter().enumerate() {
        let u = agent_utility(j, &sol.scheme, pool, env)?;
        let o = env.outside_utility(theta);
        t.push(vec![
            j.into(),
            theta.into(),
            sol.scheme.is_member(j).into(),
            sol.scheme.samples()[j].into(),
            u.into(),
            o.into(),
            (u - o).into(),
        ]);
    }
    let results = json!({
        "mode": sol.mode,
        "l_star": sol.l_star,
        "consistent": sol.consistent,
        "residual": sol.residual,
        "total_samples": sol.scheme.total(),
        "pooled_target": target_total_samples(pool.len(), env),
        "welfare": welfare(&sol.scheme, pool, env)?,
        "samples": sol.scheme.samples(),
    });
    Ok(Outputs { results, tables: vec![t] })
}

fn profile_text(p: &ActionProfile) -> String {
    p.to_string()
}

fn game(r: &Resolved, pool: &AgentPool) -> Res<Outputs> {
    let env = &r.env;
    let grids = &r.scenario.grids;
    let grid = DeclarationGrid::uniform(grids.declaration_size, env)?;
    let g = NaiveGame::new(pool, env, grid).with_mode(r.mode);
    let equilibria = g.enumerate_pure_nash(grids.j_cap)?;
    let mut eq = Table::new("equilibria.csv", &["index", "profile", "coalition_shape", "members", "margin", "payoffs"]);
    for (i, e) in equilibria.iter().enumerate() {
        let payoffs: Vec<String> = e.payoffs.iter().map(|&p| super::format_number(p)).collect();
        eq.push(vec![
            i.into(),
            profile_text(&e.profile).into(),
            e.coalition_shape.as_str().into(),
            e.profile.members().len().into(),
            e.margin.into(),
            payoffs.join(";").into(),
        ]);
    }
    let all_out = g.certify_nash(&ActionProfile::all_out(pool.len()))?;
    let dynamics = g.best_response_dynamics(&ActionProfile::truthful(pool), grids.max_rounds)?;
    let mut trace = Table::new("dynamics.csv", &["round", "agent", "action", "coalition_size"]);
    for s in &dynamics.steps {
        trace.push(vec![s.round.into(), s.agent.into(), s.action.to_string().into(), s.coalition_size.into()]);
    }
    let mut plot = Table::plot("plot_dynamics.csv");
    for (round, &size) in dynamics.sizes.iter().enumerate() {
        plot.point("coalition_size", round as f64, size as f64);
    }
    let mut shapes: Vec<&str> = equilibria.iter().map(|e| e.coalition_shape.as_str()).collect();
    shapes.sort_unstable();
    shapes.dedup();
    let results = json!({
        "mode": r.mode,
        "grid": g.grid(),
        "equilibria": equilibria.len(),
        "coalition_shapes": shapes,
        "all_out_is_nash": all_out.is_nash,
        "dynamics_converged": dynamics.converged,
        "dynamics_rounds": dynamics.rounds,
        "dynamics_final_profile": profile_text(&dynamics.profile),
        "dynamics_sizes": dynamics.sizes,
    });
    Ok(Outputs { results, tables: vec![eq, trace, plot] })
}

fn vcg(r: &Resolved, pool: &AgentPool) -> Res<Outputs> {
    let env = &r.env;
    let rep = vcg_transfers(pool.thetas(), pool, env, r.mode)?;
    let mut t = Table::new(
        "vcg.csv",
        &["agent", "theta", "samples", "transfer", "payment_to_agent", "participation_slack"],
    );
    for (j, &theta) in pool.thetas().iter().enumerate() {
        t.push(vec![
            j.into(),
            theta.into(),
            rep.samples[j].into(),
            rep.transfers[j].into(),
            (-rep.transfers[j]).into(),
            rep.participation_slack[j].into(),
        ]);
    }
    let witness = check_positive_transfer(&rep.transfers);
    let results = json!({
        "mode": r.mode,
        "l_star": rep.l_star,
        "positive_transfer_witness": witness,
        "witness_payment": witness.map(|j| -rep.transfers[j]),
        "transfers": rep.transfers,
    });
    Ok(Outputs { results, tables: vec![t] })
}

fn verifier<'a>(r: &Resolved, pool: &'a AgentPool, env: &'a LearningEnv, eta: f64) -> Res<Verifier<'a>> {
    let mut v = Verifier::new(pool, env, eta)?.with_mode(r.mode);
    if let Some(q) = r.scenario.verify.q_floor {
        v = v.with_q_floor(q)?;
    }
    Ok(v)
}

fn mc_json(m: &MonteCarloReport) -> Value {
    let first_failure = m.rows.iter().find(|row| !row.nash);
    json!({
        "noise": m.noise,
        "trials": m.trials,
        "successes": m.successes,
        "nash_fraction": m.fraction,
        "ci_low": m.ci_low,
        "ci_high": m.ci_high,
        "first_failure": first_failure,
    })
}

fn verify(r: &Resolved, pool: &AgentPool) -> Res<Outputs> {
    let env = &r.env;
    let eta = r.scenario.verify.eta.expect("eta resolved for verify");
    let seed = r.seed.expect("seed validated");
    let v = verifier(r, pool, env, eta)?;
    let mut rows = Table::new(
        "verify_trials.csv",
        &["noise", "trial", "nash", "witness_agent", "witness_gain", "estimates"],
    );
    let mut plot = Table::plot("plot_nash_fraction_vs_eta.csv");
    let mut reports = Vec::new();
    for &noise in &r.scenario.mc.noise {
        let m = v.monte_carlo_nash(noise, r.scenario.mc.trials, seed)?;
        for row in &m.rows {
            let est: Vec<String> = row.estimates.iter().map(|&e| super::format_number(e)).collect();
            rows.push(vec![
                noise.as_str().into(),
                row.trial.into(),
                row.nash.into(),
                row.witness.map(|w| w.0).into(),
                row.witness.map(|w| w.1).into(),
                est.join(";").into(),
            ]);
        }
        plot.point(noise.as_str(), eta, m.fraction);
        reports.push(mc_json(&m));
    }
    let results = json!({
        "mode": r.mode,
        "eta": eta,
        "q_floor": v.q_floor,
        "noise_models": reports,
    });
    Ok(Outputs { results, tables: vec![rows, plot] })
}

fn coverage(r: &Resolved, q: u64) -> Res<CoverageSummary> {
    let c = &r.scenario.classif;
    Ok(coverage_experiment(&CoverageConfig {
        t_star: c.t_star,
        flip_probs: c.flip_probs.clone(),
        q,
        q_prime: c.q_prime,
        delta: c.delta,
        union_size: c.union_size,
        preset: c.preset,
        trials: c.trials,
        seed: r.seed.expect("seed validated"),
    })?)
}

fn median_abs_error(s: &CoverageSummary) -> f64 {
    let mut errs: Vec<f64> = s.rows.iter().map(|row| (row.theta_hat - row.theta).abs()).collect();
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        errs[n / 2]
    } else {
        0.5 * (errs[n / 2 - 1] + errs[n / 2])
    }
}

fn estimate(r: &Resolved) -> Res<Outputs> {
    let s = coverage(r, r.scenario.classif.q)?;
    let mut t = Table::new("estimates.csv", &["trial", "agent", "theta", "theta_hat", "eta", "within"]);
    for row in &s.rows {
        t.push(vec![
            row.trial.into(),
            row.agent.into(),
            row.theta.into(),
            row.theta_hat.into(),
            row.eta.into(),
            row.within.into(),
        ]);
    }
    let etas = s.rows.iter().map(|row| row.eta);
    let results = json!({
        "preset": s.preset,
        "within_fraction": s.within_fraction,
        "median_abs_error": median_abs_error(&s),
        "eta_min": etas.clone().fold(f64::INFINITY, f64::min),
        "eta_max": etas.fold(f64::NEG_INFINITY, f64::max),
        "rows": s.rows.len(),
    });
    Ok(Outputs { results, tables: vec![t] })
}

fn sweep(r: &Resolved) -> Res<Outputs> {
    let cfg = r.scenario.sweep.as_ref().expect("sweep validated");
    match cfg.axis {
        SweepAxis::J => sweep_j(r, cfg),
        SweepAxis::Eta => sweep_eta(r, cfg),
        SweepAxis::Q => sweep_q(r, cfg),
    }
}

fn sweep_j(r: &Resolved, cfg: &SweepConfig) -> Res<Outputs> {
    let env = &r.env;
    let sizes: Vec<usize> = cfg.values.iter().map(|&v| v as usize).collect();
    let pools: Vec<AgentPool> = sizes
        .iter()
        .map(|&j| r.generated_pool(j).map_err(|e| e.context(format!("sweep point j={j}"))))
        .collect::<Res<_>>()?;
    let exponent = 1.0 / (1.0 + env.gamma());
    match cfg.child {
        Experiment::Scheme => {
            let rows: Vec<Vec<Cell>> = pools
                .par_iter()
                .map(|p| {
                    let j = p.len();
                    let at = |e: BenchError| e.context(format!("sweep point j={j}"));
                    let sol = solve(r, p, env).map_err(at)?;
                    let gap = match cfg.welfare_gap {
                        WelfareGapMode::None => None,
                        WelfareGapMode::Proxy => Some(welfare_gap_proxy(p, env).map_err(|e| at(e.into()))?),
                        WelfareGapMode::Oracle => {
                            Some(welfare_gap(p, env, r.scenario.grids.oracle_step).map_err(|e| at(e.into()))?)
                        }
                    };
                    let w = welfare(&sol.scheme, p, env).map_err(|e| at(e.into()))?;
                    let l = sol.l_star as f64;
                    Ok(vec![
                        j.into(),
                        sol.l_star.into(),
                        (l / (j as f64).powf(exponent)).into(),
                        (l / (j as f64).sqrt()).into(),
                        sol.consistent.into(),
                        sol.scheme.total().into(),
                        w.into(),
                        gap.into(),
                    ])
                })
                .collect::<Res<_>>()?;
            let mut t = Table::new(
                "sweep.csv",
                &["j", "l_star", "l_star_over_scale", "l_star_over_sqrt_j", "consistent", "total_samples", "welfare", "welfare_gap"],
            );
            let mut lplot = Table::plot("plot_lstar_vs_j.csv");
            let mut gplot = Table::plot("plot_welfare_gap_vs_j.csv");
            for row in rows {
                let (Cell::Int(j), Cell::Int(l)) = (&row[0], &row[1]) else { unreachable!("integer cells") };
                lplot.point("l_star", *j as f64, *l as f64);
                if let Cell::Num(g) = row[7] {
                    gplot.point("welfare_gap", *j as f64, g);
                }
                t.push(row);
            }
            let ratios: Vec<f64> =
                t.rows.iter().filter_map(|row| if let Cell::Num(x) = row[2] { Some(x) } else { None }).collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut tables = vec![t, lplot];
            if cfg.welfare_gap != WelfareGapMode::None {
                tables.push(gplot);
            }
            Ok(Outputs {
                results: json!({"points": sizes.len(), "scale_exponent": exponent, "band_ratio": hi / lo}),
                tables,
            })
        }
        Experiment::Game => {
            let grids = &r.scenario.grids;
            let mut t = Table::new(
                "sweep.csv",
                &["j", "equilibria", "coalition_shapes", "all_out_is_nash", "dynamics_final_size", "dynamics_rounds"],
            );
            let mut plot = Table::plot("plot_dynamics.csv");
            for p in &pools {
                let j = p.len();
                let at = |e: crate::Error| BenchError::from(e).context(format!("sweep point j={j}"));
                let grid = DeclarationGrid::uniform(grids.declaration_size, env).map_err(at)?;
                let g = NaiveGame::new(p, env, grid).with_mode(r.mode);
                let eqs = g.enumerate_pure_nash(grids.j_cap).map_err(at)?;
                let mut shapes: Vec<&str> = eqs.iter().map(|e| e.coalition_shape.as_str()).collect();
                shapes.sort_unstable();
                shapes.dedup();
                let all_out = g.certify_nash(&ActionProfile::all_out(j)).map_err(at)?;
                let dynamics = g.best_response_dynamics(&ActionProfile::truthful(p), grids.max_rounds).map_err(at)?;
                for (round, &size) in dynamics.sizes.iter().enumerate() {
                    plot.point(&format!("j={j}"), round as f64, size as f64);
                }
                t.push(vec![
                    j.into(),
                    eqs.len().into(),
                    shapes.join(";").into(),
                    all_out.is_nash.into(),
                    dynamics.profile.members().len().into(),
                    dynamics.rounds.into(),
                ]);
            }
            Ok(Outputs { results: json!({"points": sizes.len()}), tables: vec![t, plot] })
        }
        Experiment::Vcg => {
            let mut t = Table::new("sweep.csv", &["j", "witness_agent", "witness_payment", "l_star"]);
            for p in &pools {
                let j = p.len();
                let rep = vcg_transfers(p.thetas(), p, env, r.mode)
                    .map_err(|e| BenchError::from(e).context(format!("sweep point j={j}")))?;
                let w = check_positive_transfer(&rep.transfers);
                t.push(vec![j.into(), w.into(), w.map(|k| -rep.transfers[k]).into(), rep.l_star.into()]);
            }
            Ok(Outputs { results: json!({"points": sizes.len()}), tables: vec![t] })
        }
        _ => Err(BenchError::Config("sweep.child: unsupported for the j axis".into())),
    }
}

fn sweep_eta(r: &Resolved, cfg: &SweepConfig) -> Res<Outputs> {
    let env = &r.env;
    let pool = pool(r)?;
    let seed = r.seed.expect("seed validated");
    let mut t = Table::new(
        "sweep.csv",
        &["eta", "eta_over_widened_floor_eta", "noise", "trials", "successes", "nash_fraction", "ci_low", "ci_high"],
    );
    let mut plot = Table::plot("plot_nash_fraction_vs_eta.csv");
    let scale = widened_floor_eta(env)?;
    for &eta in &cfg.values {
        let v = verifier(r, pool, env, eta).map_err(|e| e.context(format!("sweep point eta={eta}")))?;
        for &noise in &r.scenario.mc.noise {
            let m = v
                .monte_carlo_nash(noise, r.scenario.mc.trials, seed)
                .map_err(|e| BenchError::from(e).context(format!("sweep point eta={eta}")))?;
            plot.point(noise.as_str(), eta, m.fraction);
            t.push(vec![
                eta.into(),
                (eta / scale).into(),
                noise.as_str().into(),
                m.trials.into(),
                m.successes.into(),
                m.fraction.into(),
                m.ci_low.into(),
                m.ci_high.into(),
            ]);
        }
    }
    Ok(Outputs { results: json!({"points": cfg.values.len(), "widened_floor_eta": scale}), tables: vec![t, plot] })
}

fn sweep_q(r: &Resolved, cfg: &SweepConfig) -> Res<Outputs> {
    let mut t = Table::new("sweep.csv", &["q", "within_fraction", "median_abs_error", "eta_max"]);
    let mut plot = Table::plot("plot_estimation_error_vs_q.csv");
    for &q in &cfg.values {
        let s = coverage(r, q as u64).map_err(|e| e.context(format!("sweep point q={q}")))?;
        let med = median_abs_error(&s);
        let eta_max = s.rows.iter().map(|row| row.eta).fold(f64::NEG_INFINITY, f64::max);
        plot.point("median_abs_error", q, med);
        plot.point("eta", q, eta_max);
        t.push(vec![(q as u64).into(), s.within_fraction.into(), med.into(), eta_max.into()]);
    }
    Ok(Outputs { results: json!({"points": cfg.values.len(), "preset": r.scenario.classif.preset}), tables: vec![t, plot] })
}
