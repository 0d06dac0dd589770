mod common;

use rand::Rng;
use v2i_secrecy::oracle::{audit_constraints, dense_position_oracle, OracleSlot};
use v2i_secrecy::reflection::beta_bounds;
use v2i_secrecy::scene::{feasible_interval, next_velocity, Interval, SlotPlan};
use v2i_secrecy::trajectory::{critical_points, optimize_trajectory, ratio_a, SlotContext};
use v2i_secrecy::{baseline_plan, run_ao, ScenarioConfig};

/// Baseline plan of `cfg` with random coefficients and powers.
fn randomized_plan(rng: &mut impl Rng, cfg: &ScenarioConfig) -> SlotPlan {
    let mut plan = baseline_plan(cfg).unwrap();
    for n in 0..cfg.n_slots {
        let pt = common::random_slot_point(rng, cfg);
        plan.betas[n] = pt.beta;
        plan.power_cw[n] = pt.p_s / cfg.n_slots as f64;
        plan.power_an[n] = pt.p_a / cfg.n_slots as f64;
    }
    plan
}

fn check_against_dense_grid(cfg: &ScenarioConfig, plan: &SlotPlan) {
    let (xs, _) = optimize_trajectory(plan, cfg).unwrap();
    let (mut x, mut v) = (0.0, cfg.initial_velocity());
    for (n, &chosen) in xs.iter().enumerate() {
        let window = feasible_interval(x, v, n, cfg).unwrap();
        assert!(window.lo <= chosen && chosen <= window.hi, "slot {n}");
        let s = OracleSlot { slot: n, x_g: chosen, beta: plan.betas[n], p_s: plan.power_cw[n], p_a: plan.power_an[n] };
        let (_, grid_best) = dense_position_oracle(window, s, cfg, 10_000);
        let ctx = SlotContext::from_plan(plan, n, cfg);
        let ours = v2i_secrecy::trajectory::slot_secrecy_at(chosen, &ctx, cfg).unwrap();
        assert!(ours >= grid_best - 1e-8, "slot {n}: {ours} < {grid_best}");
        v = next_velocity(x, v, chosen, cfg);
        x = chosen;
    }
}

#[test]
fn every_slot_beats_dense_grid() {
    check_against_dense_grid(&ScenarioConfig::reference(50), &baseline_plan(&ScenarioConfig::reference(50)).unwrap());
    let mut rng = common::rng(51);
    for _ in 0..20 {
        let cfg = common::random_config(&mut rng, 30);
        let plan = randomized_plan(&mut rng, &cfg);
        check_against_dense_grid(&cfg, &plan);
    }
}

#[test]
fn few_stationary_points_on_long_stretches() {
    let mut rng = common::rng(52);
    let mut most = 0;
    for _ in 0..1_000 {
        let cfg = common::random_config(&mut rng, 50);
        let pt = common::random_slot_point(&mut rng, &cfg);
        let ctx = SlotContext { slot: pt.slot, beta: pt.beta, p_s: pt.p_s, p_a: pt.p_a, x_e: cfg.ev_position(pt.slot) };
        let stretch = Interval { lo: -100.0, hi: cfg.min_distance + 100.0 };
        most = most.max(critical_points(stretch, &ctx, &cfg).unwrap().len());
    }
    assert!(most <= 11, "{most} stationary points");
}

/// Local extrema of `ln A` from a uniform scan of `steps` points, each
/// refined by a parabola through its neighbours, with the vertex shift that
/// rounding in the three sampled values can cause.
fn dense_extrema(interval: Interval, ctx: &SlotContext, cfg: &ScenarioConfig, steps: usize) -> Vec<(f64, f64)> {
    let h = interval.width() / (steps - 1) as f64;
    let f: Vec<f64> = (0..steps).map(|k| ratio_a(interval.lo + h * k as f64, ctx, cfg).unwrap().ln()).collect();
    let mut out = Vec::new();
    for k in 1..steps - 1 {
        let (a, b, c) = (f[k - 1], f[k], f[k + 1]);
        if (b > a && b >= c) || (b < a && b <= c) {
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            let resolution = 4.0 * f64::EPSILON * b.abs().max(1.0) / denom.abs().max(f64::MIN_POSITIVE) * h;
            out.push((interval.lo + h * (k as f64 + shift), resolution));
        }
    }
    out
}

#[test]
fn roots_agree_with_dense_scan() {
    let mut rng = common::rng(53);
    let mut sharp = 0;
    for _ in 0..10 {
        let cfg = common::random_config(&mut rng, 50);
        let pt = common::random_slot_point(&mut rng, &cfg);
        let ctx = SlotContext { slot: pt.slot, beta: pt.beta, p_s: pt.p_s, p_a: pt.p_a, x_e: cfg.ev_position(pt.slot) };
        let stretch = Interval { lo: -50.0, hi: 50.0 };
        let roots = critical_points(stretch, &ctx, &cfg).unwrap();
        let dense = dense_extrema(stretch, &ctx, &cfg, 1_000_000);
        assert_eq!(roots.len(), dense.len(), "roots {roots:?} vs dense {dense:?}");
        sharp += dense.iter().filter(|e| e.1 <= 1e-6).count();
        for (r, &(d, resolution)) in roots.iter().zip(&dense) {
            assert!((r - d).abs() <= 1e-6_f64.max(resolution), "root {r} vs dense {d} (resolution {resolution})");
        }
    }
    assert!(sharp >= 5, "only {sharp} extrema resolved at 1e-6 m");
}

#[test]
fn optimized_plans_pass_audit() {
    let mut rng = common::rng(54);
    for _ in 0..20 {
        let cfg = common::random_config(&mut rng, 30);
        let plan = randomized_plan(&mut rng, &cfg);
        let (positions, velocities) = optimize_trajectory(&plan, &cfg).unwrap();
        let plan = SlotPlan { positions, velocities, ..plan };
        let violations = audit_constraints(&plan, &cfg, 1e-9);
        assert!(violations.is_empty(), "{violations:?}");
    }
}

#[test]
fn harvesting_requirement_limits_positions() {
    let mut cfg = ScenarioConfig::reference(20);
    cfg.e_b = 1e-4;
    let (plan, _) = run_ao(&cfg).unwrap();
    for (n, (&x, &b)) in plan.positions.iter().zip(&plan.betas).enumerate() {
        assert!(b <= beta_bounds(x, &cfg).hi + 1e-12, "slot {n}");
    }
    assert!(audit_constraints(&plan, &cfg, 1e-9).is_empty());
}
