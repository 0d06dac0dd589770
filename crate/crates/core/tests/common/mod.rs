#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2i_secrecy::ScenarioConfig;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reference scenario with randomized geometry, budget and channel
/// constants; always admits the uniform-speed baseline.
pub fn random_config(rng: &mut impl Rng, max_slots: usize) -> ScenarioConfig {
    let n = rng.gen_range(1..=max_slots);
    let mut cfg = ScenarioConfig::reference(n);
    cfg.ev_speed = rng.gen_range(20.0..35.0);
    cfg.min_distance = n as f64 * cfg.ev_speed * cfg.slot_duration;
    cfg.infra_pos = [rng.gen_range(0.0..=cfg.min_distance), rng.gen_range(4.0..12.0), rng.gen_range(1.0..6.0)];
    cfg.ev_x0 = rng.gen_range(-30.0..30.0);
    cfg.power_budget = rng.gen_range(1.0..40.0);
    cfg.alpha = rng.gen_range(0.0..=1.0);
    cfg.s_tg = rng.gen_range(0.05..0.5);
    cfg.s_ge = rng.gen_range(0.05..0.5);
    cfg.s_te = rng.gen_range(0.05..0.5);
    cfg.validate().expect("random config is valid");
    cfg
}

/// Random slot decision variables for `cfg`.
pub struct SlotPoint {
    pub slot: usize,
    pub x_g: f64,
    pub beta: f64,
    pub p_s: f64,
    pub p_a: f64,
}

pub fn random_slot_point(rng: &mut impl Rng, cfg: &ScenarioConfig) -> SlotPoint {
    let half = cfg.power_budget / 2.0;
    SlotPoint {
        slot: rng.gen_range(0..cfg.n_slots),
        x_g: rng.gen_range(0.0..=cfg.min_distance.max(1e-3)),
        beta: rng.gen_range(cfg.beta_epsilon..=1.0 - cfg.beta_epsilon),
        p_s: rng.gen_range(0.0..=half),
        p_a: rng.gen_range(0.0..=half),
    }
}
