//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.
#![allow(clippy::type_complexity)]

mod common;

use std::time::Instant;

use mabarc_core::instance::{catalog, catalog_get, random_feasible_instance, RandomSpec};
use mabarc_core::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use mabarc_core::oracle::{
    analyze, check_best_arm_characterization, optimal_allocation, zero_entry_exists, OracleConfig,
};
use mabarc_core::policy::{Mode, PolicyConfig};
use mabarc_core::sim::{
    coverage_experiment, gamma_target_instance, run_fast, CoverageConfig, EpisodeRunner, RunConfig, RunResult,
};
use mabarc_core::{ActiveSet, Algorithm, Instance, PairMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mean_at(r: &RunResult, t: u64, f: fn(&mabarc_core::sim::RoundRecord) -> f64) -> f64 {
    r.traces.iter().map(|tr| f(tr.at(t))).sum::<f64>() / r.traces.len() as f64
}

fn run(inst: &Instance, alg: Algorithm, horizon: u64, epochs: u64) -> RunResult {
    run_fast(&RunConfig::new(inst.clone(), alg, horizon, epochs, SEED)).expect("feasible catalog instance")
}

fn c1_planning() -> Outcome {
    let start = Instant::now();
    let half = 0.5;
    let eps = 0.1;
    let tables: Vec<(&str, Option<f64>, Vec<Vec<f64>>)> = vec![
        ("nu_sim", None, vec![vec![1.0, half, half], vec![0.0, half, 0.0], vec![0.0, 0.0, half]]),
        (
            "nu_plus",
            Some(eps),
            vec![
                vec![1.0, (1.0 + 2.0 * eps) / (2.0 * (1.0 + eps)), 0.0],
                vec![0.0, 1.0 / (2.0 * (1.0 + eps)), 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        ),
        (
            "nu_minus",
            Some(eps),
            vec![
                vec![1.0, (1.0 - 2.0 * eps) / (2.0 * (1.0 - eps)), 0.0],
                vec![0.0, 1.0 / (2.0 * (1.0 - eps)), 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        ),
        ("nu_prime_lb", None, vec![vec![1.0, half, half], vec![0.0, half, 0.0], vec![0.0, 0.0, half]]),
        ("nu_prime_ns", None, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
        ("greedy_ce", None, vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, param, rows) in &tables {
        let inst = catalog_get(name, *param).unwrap();
        let plan = optimal_allocation(&inst, &OracleConfig::default()).unwrap();
        let err = plan.allocation.matrix().max_abs_diff(&PairMatrix::from_rows(rows).unwrap());
        worst = worst.max(err);
        if err > 1e-7 {
            bad.push(inst.name().to_string());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 1.0,
        format!("{} tables, max entry error {worst:.1e} (tol 1e-7), {secs:.3}s (limit 1s) {bad:?}", tables.len()),
    )
}

fn c2_active_sets() -> Outcome {
    let cfg = OracleConfig::default();
    let sim = optimal_allocation(&catalog_get("nu_sim", None).unwrap(), &cfg).unwrap().active_set;
    let ns = optimal_allocation(&catalog_get("nu_prime_ns", None).unwrap(), &cfg).unwrap().active_set;
    let want_sim = ActiveSet::from_one_based(&[2, 3], &[(2, 1), (3, 1), (3, 2), (2, 3)]);
    let want_ns = ActiveSet::from_one_based(&[], &[(2, 1), (3, 1), (1, 2), (3, 2), (1, 3), (2, 3)]);
    outcome(sim == want_sim && ns == want_ns, format!("I*(nu_sim) = {sim}, I*(nu_prime_ns) = {ns}"))
}

fn c3_gaps() -> Outcome {
    let cfg = OracleConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for e in catalog() {
        let inst = catalog_get(e.name, None).unwrap();
        let start = Instant::now();
        let rep = analyze(&inst, &cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let expected = if inst.arms() == 3 && inst.contexts() == 3 { Some(924) } else { None };
        let full = rep.enumeration.complete && expected.is_none_or(|n| rep.enumeration.family_size == n);
        let rho_star = rep.rho_star.unwrap_or(0.0);
        let pass = rep.optimal_set_gap.s <= 1e-7 && rep.optimal_set_gap.rho <= 1e-7 && rho_star > 1e-4 && full && secs < 30.0;
        ok &= pass;
        parts.push(format!(
            "{}: s(I*)={:.1e} rho(I*)={:.1e} rho*={rho_star:.4} sets={} {secs:.2}s{}",
            e.name,
            rep.optimal_set_gap.s,
            rep.optimal_set_gap.rho,
            rep.enumeration.family_size,
            if pass { "" } else { " <- FAIL" }
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c4_structure() -> Outcome {
    let cfg = OracleConfig::default();
    let spec = RandomSpec {
        gamma_min: 1e-3,
        ..RandomSpec::new(3, 3)
    };
    let (mut checked, mut regenerated, mut failures) = (0, 0, 0);
    let mut seed = 0u64;
    while checked < 120 {
        seed += 1;
        let inst = random_feasible_instance(&spec, seed).unwrap();
        let plan = optimal_allocation(&inst, &cfg).unwrap();
        if plan.degenerate {
            regenerated += 1;
            continue;
        }
        checked += 1;
        let zero = zero_entry_exists(&plan.allocation, cfg.tol_act);
        let best = check_best_arm_characterization(&inst, &plan.allocation, &plan.active_set, cfg.tol_act).holds;
        failures += usize::from(!(zero && best));
    }
    outcome(
        failures == 0,
        format!("{checked} non-degenerate instances ({regenerated} degenerate regenerated), {failures} failures"),
    )
}

/// LCB recomputed from the runner's sufficient statistics.
fn independent_lcb(runner: &EpisodeRunner, m_cap: f64) -> (PairMatrix, PairMatrix) {
    let s = runner.state();
    let (arms, contexts) = (s.arms(), s.contexts());
    let kappa = (arms * contexts) as f64;
    let t = s.round() as f64;
    let radius = |n: u64| if n == 0 { m_cap } else { (2.0 * (2.0 * kappa * t).ln() / n as f64).sqrt() };
    let mean = |k, c| if s.count(k, c) == 0 { 0.0 } else { s.reward_sum(k, c) / s.count(k, c) as f64 };
    let lcb = PairMatrix::from_fn(arms, contexts, |k, c| mean(k, c) - radius(s.count(k, c)));
    let ucb = PairMatrix::from_fn(arms, contexts, |k, c| mean(k, c) + radius(s.count(k, c)));
    (lcb, ucb)
}

fn c5_pessimistic_rounds() -> Outcome {
    let m_cap = PolicyConfig::default().m_cap;
    let instances = [
        catalog_get("nu_sim", None).unwrap(),
        catalog_get("nu_sim", None).unwrap().scaled(4.0).unwrap(),
        catalog_get("nu_prime_ns", None).unwrap(),
    ];
    let (mut pess, mut covered, mut lcb_fail, mut viol_fail) = (0u64, 0u64, 0u64, 0u64);
    for inst in &instances {
        for epoch in 0..3 {
            let mut runner = EpisodeRunner::planned(inst, Algorithm::Oplp, SEED, epoch, PolicyConfig::default()).unwrap();
            for _ in 0..20_000 {
                let (lcb, ucb) = independent_lcb(&runner, m_cap);
                let (rec, decision) = runner.step_detailed();
                if decision.mode != Mode::PessimisticLP {
                    continue;
                }
                pess += 1;
                let g = decision.allocation.revenues(&lcb.scale_columns(inst.probs()));
                if g.iter().zip(inst.thresholds()).any(|(g, l)| *g < l - 1e-9) {
                    lcb_fail += 1;
                }
                let inside = inst
                    .means()
                    .iter_pairs()
                    .all(|((k, c), m)| lcb[(k, c)] <= m && m <= ucb[(k, c)]);
                if inside {
                    covered += 1;
                    if rec.instant_violation != 0.0 {
                        viol_fail += 1;
                    }
                }
            }
        }
    }
    outcome(
        pess > 0 && lcb_fail == 0 && viol_fail == 0,
        format!("{pess} pessimistic rounds: {lcb_fail} LCB shortfalls; {covered} inside the confidence set with {viol_fail} violating"),
    )
}

fn c6_pareto() -> Outcome {
    let inst = catalog_get("nu_sim", None).unwrap();
    let olp = run(&inst, Algorithm::Olp, 50_000, 5);
    let oplp = run(&inst, Algorithm::Oplp, 50_000, 5);
    let (ro, rp) = (&olp.summary.terminal_regret, &oplp.summary.terminal_regret);
    let (vo, vp) = (&olp.summary.terminal_violation, &oplp.summary.terminal_violation);
    let regret_sep = rp.mean - ro.mean > ro.std.max(rp.std);
    let violation_sep = vo.mean - vp.mean > vo.std.max(vp.std);
    let ratio = |r: &RunResult, t: u64| mean_at(r, t, |x| x.cum_regret) / (t as f64).sqrt();
    let olp_change = ratio(&olp, 50_000) / ratio(&olp, 12_500) - 1.0;
    let oplp_change = ratio(&oplp, 50_000) / ratio(&oplp, 12_500) - 1.0;
    let shape = olp_change <= -0.25 && oplp_change.abs() < 0.25;
    outcome(
        regret_sep && violation_sep && shape,
        format!(
            "R: olp {:.1}±{:.1} < oplp {:.1}±{:.1}; V: oplp {:.1}±{:.1} < olp {:.1}±{:.1}; R/sqrtT change 12.5k->50k: olp {:+.1}% (need <= -25%), oplp {:+.1}% (need |.| < 25%)",
            ro.mean, ro.std, rp.mean, rp.std, vp.mean, vp.std, vo.mean, vo.std, 100.0 * olp_change, 100.0 * oplp_change
        ),
    )
}

fn c7_non_saturating() -> Outcome {
    let inst = catalog_get("nu_prime_ns", None).unwrap();
    let r = run(&inst, Algorithm::Olp, 5_000, 5);
    let ratio = |t: u64| mean_at(&r, t, |x| x.cum_violation) / (t as f64).sqrt();
    let change = ratio(5_000) / ratio(1_250) - 1.0;
    outcome(
        change <= -0.25,
        format!("V/sqrtT {:.4} -> {:.4} ({:+.1}%, need <= -25%)", ratio(1_250), ratio(5_000), 100.0 * change),
    )
}

fn c8_margin_sweep() -> Outcome {
    // Margins up to 1 need room below the thresholds: scale nu_sim by 4
    // (margin 1) and shift λ uniformly.
    let base = catalog_get("nu_sim", None).unwrap().scaled(4.0).unwrap();
    let horizon = 50_000u64;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut violations = Vec::new();
    for (i, target) in [0.001, 0.01, 0.1, 1.0].into_iter().enumerate() {
        let inst = gamma_target_instance(&base, target).unwrap();
        let r = run(&inst, Algorithm::Oplp, horizon, 5);
        let records = || r.traces.iter().flat_map(|t| &t.records);
        let never = records().filter(|x| !x.pessimistic_feasible).count() as f64 / records().count() as f64;
        let tail: Vec<_> = records().filter(|x| x.t > 3 * horizon / 4).collect();
        let late = tail.iter().filter(|x| x.pessimistic_feasible).count() as f64 / tail.len() as f64;
        let pass = if i < 2 { never >= 0.99 } else { late >= 0.5 };
        ok &= pass;
        violations.push(r.summary.terminal_violation.mean);
        parts.push(format!(
            "gamma={target}: infeasible {:.1}% last-quarter feasible {:.1}% V={:.1}",
            100.0 * never,
            100.0 * late,
            r.summary.terminal_violation.mean
        ));
    }
    let monotone = violations.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok && monotone, format!("{}; V non-increasing: {monotone}", parts.join("; ")))
}

fn c9_coverage() -> Outcome {
    let inst = catalog_get("nu_sim", None).unwrap();
    let cfg = CoverageConfig {
        algorithm: Algorithm::Olp,
        epochs: 200,
        base_seed: SEED,
        checkpoints: vec![100, 1_000, 10_000],
        policy: PolicyConfig::default(),
    };
    let table = coverage_experiment(&inst, &cfg).unwrap();
    let parts: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("t={}: {:.3} (gate {:.4})", r.t, r.fraction, r.gate))
        .collect();
    outcome(table.rows.iter().all(|r| r.passes()), parts.join("; "))
}

fn c10_greedy() -> Outcome {
    let inst = catalog_get("greedy_ce", None).unwrap();
    let horizon = 10_000u64;
    let per_round = |r: &RunResult| -> Vec<f64> {
        r.summary.terminal_regret.per_epoch.iter().map(|v| v / horizon as f64).collect()
    };
    let greedy = per_round(&run(&inst, Algorithm::Greedy, horizon, 100));
    let olp = per_round(&run(&inst, Algorithm::Olp, horizon, 100));
    let locked = greedy.iter().filter(|&&v| v > 0.2).count() as f64 / greedy.len() as f64;
    let olp_max = olp.iter().copied().fold(0.0, f64::max);
    outcome(
        locked >= 0.05 && olp_max < 0.02,
        format!("greedy R/T > 0.2 on {:.0}% of seeds (need >= 5%); OLP max R/T {olp_max:.4} (need < 0.02)", 100.0 * locked),
    )
}

fn c11_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut lp_fail = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=4usize);
        let mut coeff = || f64::from(rng.random_range(-5i32..=5));
        let c: Vec<f64> = (0..n).map(|_| coeff()).collect();
        let rows: Vec<common::Row> = (0..m)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| coeff()).collect();
                let sense = [Sense::Le, Sense::Le, Sense::Ge, Sense::Eq][(coeff() + 5.0) as usize % 4];
                (a, sense, coeff() * 2.0 + 5.0)
            })
            .collect();
        let mut lp = LinearProgram::new(n);
        lp.set_objective(c.clone());
        for (a, s, b) in &rows {
            lp.add_constraint(a.clone(), *s, *b);
        }
        for j in 0..n {
            lp.set_bounds(j, 0.0, Some(10.0));
        }
        let sol = solve_lp(&lp).unwrap();
        let agree = match common::vertex_max(&c, &rows, Some(10.0)) {
            None => sol.status == LpStatus::Infeasible,
            Some(v) => sol.status == LpStatus::Optimal && (sol.objective_value - v).abs() <= 1e-7,
        };
        lp_fail += usize::from(!agree);
    }
    let spec = RandomSpec {
        gamma_min: 0.01,
        ..RandomSpec::new(2, 2)
    };
    let mut grid_fail = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..500 {
        let inst = random_feasible_instance(&spec, 10_000 + seed).unwrap();
        let f = optimal_allocation(&inst, &OracleConfig::default()).unwrap().f_star;
        let gap = common::grid_max_2x2(&inst, 1e-3, 0.0).map_or(f64::INFINITY, |g| (f - g).abs());
        worst = worst.max(gap);
        grid_fail += usize::from(gap > 2e-3);
    }
    outcome(
        lp_fail == 0 && grid_fail == 0,
        format!("500 LPs: {lp_fail} disagreements with vertex enumeration; 500 2x2 instances: {grid_fail} beyond 2e-3 of the grid (worst {worst:.1e})"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("planning exactness", c1_planning),
        ("active-set exactness", c2_active_sets),
        ("gap characterization", c3_gaps),
        ("structural properties", c4_structure),
        ("pessimistic zero violation", c5_pessimistic_rounds),
        ("regret/violation ordering", c6_pareto),
        ("non-saturating violation rate", c7_non_saturating),
        ("margin sensitivity", c8_margin_sweep),
        ("confidence coverage", c9_coverage),
        ("greedy counterexample", c10_greedy),
        ("solver oracle equivalence", c11_solver),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
