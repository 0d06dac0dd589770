mod common;

use rand::Rng;
use v2i_secrecy::oracle::{grid_beta_oracle, GridSpec, OracleSlot};
use v2i_secrecy::rate::{secrecy_rate, sinr_eavesdropper, sinr_legitimate};
use v2i_secrecy::reflection::{beta_bounds_for_gain, optimize_betas, optimize_slot_beta, stationary_betas};
use v2i_secrecy::scene::slot_gains;
use v2i_secrecy::{baseline_plan, ScenarioConfig};

#[test]
fn matches_fine_grid_on_random_scenarios() {
    let mut rng = common::rng(31);
    let mut checked = 0;
    while checked < 20 {
        let cfg = common::random_config(&mut rng, 50);
        let pt = common::random_slot_point(&mut rng, &cfg);
        let g = slot_gains(pt.x_g, cfg.ev_position(pt.slot), pt.slot, &cfg).unwrap();
        let bounds = beta_bounds_for_gain(g.g_tg, &cfg);
        if bounds.is_empty() {
            continue;
        }
        let ours = optimize_slot_beta(g, pt.p_s, pt.p_a, 0.5, bounds, &cfg);
        let grid = GridSpec::with_spacing(bounds.lo, bounds.hi, 1e-5);
        let s = OracleSlot { slot: pt.slot, x_g: pt.x_g, beta: 0.5, p_s: pt.p_s, p_a: pt.p_a };
        let (b_grid, v_grid) = grid_beta_oracle(s, &cfg, grid);
        let value = *ours.history.last().unwrap();
        assert!(value >= v_grid - 1e-8, "value {value} < grid {v_grid}");
        if v_grid > 0.0 {
            assert!((ours.beta - b_grid).abs() <= 1e-4, "beta {} vs grid {b_grid}", ours.beta);
        }
        checked += 1;
    }
}

#[test]
fn stationary_points_are_grid_extrema() {
    let mut rng = common::rng(32);
    for _ in 0..200 {
        let cfg = common::random_config(&mut rng, 50);
        let pt = common::random_slot_point(&mut rng, &cfg);
        let g = slot_gains(pt.x_g, cfg.ev_position(pt.slot), pt.slot, &cfg).unwrap();
        let bounds = beta_bounds_for_gain(g.g_tg, &cfg);
        let gap = |b: f64| {
            (1.0 + sinr_legitimate(g.g_tg, b, pt.p_s, pt.p_a, &cfg)).ln()
                - (1.0 + sinr_eavesdropper(g, b, pt.p_s, pt.p_a, &cfg)).ln()
        };
        let slope = |b: f64| {
            let h = 1e-7 * b.max(1e-3);
            (gap(b + h) - gap(b - h)) / (2.0 * h)
        };
        let typical = (0..=1000)
            .map(|k| slope(bounds.lo + (bounds.hi - bounds.lo) * k as f64 / 1000.0).abs())
            .fold(0.0, f64::max);
        for b in stationary_betas(g, pt.p_s, pt.p_a, bounds, &cfg) {
            assert!(bounds.lo <= b && b <= bounds.hi);
            assert!(slope(b).abs() <= 1e-5 * typical + 1e-12, "slope {} at {b} (typical {typical})", slope(b));
        }
    }
}

#[test]
fn no_carrier_returns_lower_bound() {
    let cfg = ScenarioConfig::reference(20);
    let g = slot_gains(10.0, cfg.ev_position(3), 3, &cfg).unwrap();
    let bounds = beta_bounds_for_gain(g.g_tg, &cfg);
    let r = optimize_slot_beta(g, 0.0, 0.5, 0.7, bounds, &cfg);
    assert_eq!(r.beta, bounds.lo);
    assert_eq!(*r.history.last().unwrap(), 0.0);
}

#[test]
fn histories_are_nondecreasing() {
    let mut rng = common::rng(33);
    for _ in 0..200 {
        let cfg = common::random_config(&mut rng, 50);
        let pt = common::random_slot_point(&mut rng, &cfg);
        let g = slot_gains(pt.x_g, cfg.ev_position(pt.slot), pt.slot, &cfg).unwrap();
        let bounds = beta_bounds_for_gain(g.g_tg, &cfg);
        let r = optimize_slot_beta(g, pt.p_s, pt.p_a, rng.gen_range(bounds.lo..=bounds.hi), bounds, &cfg);
        for w in r.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{:?}", r.history);
        }
        let final_rate = secrecy_rate(
            sinr_legitimate(g.g_tg, r.beta, pt.p_s, pt.p_a, &cfg),
            sinr_eavesdropper(g, r.beta, pt.p_s, pt.p_a, &cfg),
        );
        assert!((final_rate - r.history.last().unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn slot_order_does_not_matter() {
    let cfg = ScenarioConfig::reference(20);
    let plan = baseline_plan(&cfg).unwrap();
    let all = optimize_betas(&plan, &cfg).unwrap().betas;
    let gains = v2i_secrecy::scene::link_gains(&plan.positions, &cfg.ev_positions(), &cfg).unwrap();
    for n in (0..20).rev() {
        let g = gains.slot(n);
        let r = optimize_slot_beta(
            g,
            plan.power_cw[n],
            plan.power_an[n],
            plan.betas[n],
            beta_bounds_for_gain(g.g_tg, &cfg),
            &cfg,
        );
        assert_eq!(r.beta.to_bits(), all[n].to_bits(), "slot {n}");
    }
}

#[test]
fn closer_reader_wants_less_reflection() {
    let mut cfg = ScenarioConfig::reference(20);
    cfg.infra_pos = [50.0, 8.0, 3.0];
    let p = cfg.power_budget / (2 * cfg.n_slots) as f64;
    let mut previous = f64::INFINITY;
    for x_g in [0.0, 10.0, 20.0, 30.0, 40.0, 50.0] {
        // Eavesdropper abreast of the tag.
        let g = slot_gains(x_g, x_g, 0, &cfg).unwrap();
        let r = optimize_slot_beta(g, p, p, 0.5, beta_bounds_for_gain(g.g_tg, &cfg), &cfg);
        assert!(r.beta <= previous + 1e-9, "beta {} at x_g = {x_g} after {previous}", r.beta);
        previous = r.beta;
    }
}
