mod common;

use proptest::prelude::*;
use rand::Rng;
use v2i_secrecy::oracle::{grid_power_oracle, sorted_simplex_projection};
use v2i_secrecy::power::{optimize_power, project_budget, PowerProblem, PowerVector};
use v2i_secrecy::rate::sum_secrecy;
use v2i_secrecy::scene::{link_gains, SlotPlan};
use v2i_secrecy::{baseline_plan, ScenarioConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_matches_sorting_oracle(
        v in proptest::collection::vec(-5.0f64..20.0, 1..60),
        budget in 0.0f64..50.0,
    ) {
        let fast = project_budget(&v, budget);
        let slow = sorted_simplex_projection(&v, budget);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
        prop_assert!(fast.iter().all(|&x| x >= 0.0));
        prop_assert!(fast.iter().sum::<f64>() <= budget + 1e-10);
        let again = project_budget(&fast, budget);
        for (a, b) in again.iter().zip(&fast) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

/// Random plan on the baseline trajectory of a random scenario, with
/// interior powers.
fn random_problem(rng: &mut impl Rng, max_slots: usize) -> (ScenarioConfig, SlotPlan) {
    let cfg = common::random_config(rng, max_slots);
    let mut plan = baseline_plan(&cfg).unwrap();
    let n = cfg.n_slots;
    let weights: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum::<f64>() / rng.gen_range(0.5..1.0);
    let powers = PowerVector::from_flat(&weights.iter().map(|w| w / total * cfg.power_budget).collect::<Vec<_>>());
    plan.power_cw = powers.p_s;
    plan.power_an = powers.p_a;
    for b in plan.betas.iter_mut() {
        *b = (*b * rng.gen_range(0.1..1.0)).max(cfg.beta_epsilon);
    }
    (cfg, plan)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = common::rng(41);
    let mut checked = 0;
    while checked < 100 {
        let (cfg, plan) = random_problem(&mut rng, 10);
        let gains = link_gains(&plan.positions, &cfg.ev_positions(), &cfg).unwrap();
        let problem = PowerProblem::new(&gains, &plan.betas, &cfg);
        let x = PowerVector { p_s: plan.power_cw.clone(), p_a: plan.power_an.clone() }.to_flat();
        // Multipliers from a different point so the check is not at the tight point.
        let other: Vec<f64> = x.iter().map(|v| v * rng.gen_range(0.8..1.25)).collect();
        let y = problem.multipliers(&other, &gains, &plan.betas);
        if !problem.objective(&x, &y).is_finite() {
            continue;
        }
        let g = problem.gradient(&x, &y);
        let h = 1e-6 * cfg.power_budget;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (problem.objective(&up, &y) - problem.objective(&down, &y)) / (2.0 * h);
            let err = (fd - g[k]).abs() / scale.max(1e-300);
            assert!(err <= 1e-5, "component {k}: analytic {} vs fd {fd} (rel {err})", g[k]);
        }
        checked += 1;
    }
}

#[test]
fn surrogate_is_concave_in_powers() {
    let mut rng = common::rng(42);
    for _ in 0..200 {
        let (cfg, plan) = random_problem(&mut rng, 10);
        let gains = link_gains(&plan.positions, &cfg.ev_positions(), &cfg).unwrap();
        let problem = PowerProblem::new(&gains, &plan.betas, &cfg);
        let a = PowerVector { p_s: plan.power_cw.clone(), p_a: plan.power_an.clone() }.to_flat();
        let y = problem.multipliers(&a, &gains, &plan.betas);
        let b: Vec<f64> = a.iter().map(|v| v * rng.gen_range(0.0..1.0)).collect();
        let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
        let (fa, fb, fm) = (problem.objective(&a, &y), problem.objective(&b, &y), problem.objective(&mid, &y));
        if fa.is_finite() && fb.is_finite() {
            assert!(fm >= 0.5 * (fa + fb) - 1e-10 * fm.abs().max(1.0), "{fm} < mean of {fa}, {fb}");
        }
    }
}

#[test]
fn distant_eavesdropper_and_full_residual_need_no_noise() {
    let mut cfg = ScenarioConfig::reference(1);
    cfg.alpha = 1.0;
    cfg.ev_x0 = 1e9;
    let plan = baseline_plan(&cfg).unwrap();
    let out = optimize_power(&plan, &cfg).unwrap();
    assert_eq!(out.powers.p_a[0], 0.0);
    assert!((out.powers.p_s[0] - cfg.power_budget).abs() <= 1e-9 * cfg.power_budget);
}

#[test]
fn two_slots_match_grid_oracle() {
    let cfg = ScenarioConfig::reference(2);
    let plan = baseline_plan(&cfg).unwrap();
    let out = optimize_power(&plan, &cfg).unwrap();
    let ours = sum_secrecy(
        &SlotPlan { power_cw: out.powers.p_s.clone(), power_an: out.powers.p_a.clone(), ..plan.clone() },
        &cfg,
    )
    .unwrap();
    let (_, oracle) = grid_power_oracle(&plan, &cfg, 200).unwrap();
    assert!(ours >= oracle * 0.99, "ours {ours} vs oracle {oracle}");
}

#[test]
fn larger_budget_never_hurts() {
    let mut previous = 0.0;
    for budget in [5.0, 10.0, 20.0, 30.0, 40.0] {
        let mut cfg = ScenarioConfig::reference(20);
        cfg.power_budget = budget;
        let plan = baseline_plan(&cfg).unwrap();
        let out = optimize_power(&plan, &cfg).unwrap();
        let v = *out.trace.last().unwrap();
        assert!(v >= previous - 1e-9, "P = {budget}: {v} < {previous}");
        previous = v;
    }
}

#[test]
fn output_respects_budget_and_improves_monotonically() {
    let mut rng = common::rng(43);
    for _ in 0..30 {
        let (cfg, plan) = random_problem(&mut rng, 20);
        let out = optimize_power(&plan, &cfg).unwrap();
        assert!(out.powers.p_s.iter().chain(&out.powers.p_a).all(|&p| p >= 0.0));
        assert!(out.powers.total() <= cfg.power_budget * (1.0 + 1e-12));
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let start = sum_secrecy(&plan, &cfg).unwrap();
        let end = sum_secrecy(&SlotPlan { power_cw: out.powers.p_s, power_an: out.powers.p_a, ..plan }, &cfg).unwrap();
        assert!(end >= start - 1e-12);
        assert!((end - out.trace.last().unwrap()).abs() <= 1e-9 * end.max(1.0));
    }
}

#[test]
fn final_surrogate_solve_is_stationary() {
    for n in [5, 20, 50] {
        let cfg = ScenarioConfig::reference(n);
        let plan = baseline_plan(&cfg).unwrap();
        let out = optimize_power(&plan, &cfg).unwrap();
        assert!(out.projected_gradient_norm <= 1e-6 * cfg.power_budget, "N = {n}: {}", out.projected_gradient_norm);
    }
}
