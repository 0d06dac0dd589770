//! Road geometry, kinematic feasibility and large-scale link gains.
//!
//! The tag vehicle (TV) drives along `y = lane_y_tv`, the eavesdropper (EV)
//! along `y = lane_y_ev` at constant speed, and the reader hangs at
//! `infra_pos`. Slots are indexed from 0; the vehicle starts at `x = 0`
//! before slot 0 and must be at or beyond `min_distance` after the last slot.

mod config;

pub use config::{dbm_to_watts, ScenarioConfig};

use crate::error::{Error, Result};

/// Per-slot decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotPlan {
    /// Tag vehicle position at the end of each slot.
    pub positions: Vec<f64>,
    /// Tag vehicle speed at the end of each slot.
    pub velocities: Vec<f64>,
    pub betas: Vec<f64>,
    /// Carrier power per slot.
    pub power_cw: Vec<f64>,
    /// Artificial-noise power per slot.
    pub power_an: Vec<f64>,
}

impl SlotPlan {
    pub fn n_slots(&self) -> usize {
        self.positions.len()
    }

    pub(crate) fn check_len(&self, cfg: &ScenarioConfig) -> Result<()> {
        let n = cfg.n_slots;
        for len in
            [self.positions.len(), self.velocities.len(), self.betas.len(), self.power_cw.len(), self.power_an.len()]
        {
            if len != n {
                return Err(Error::SlotCountMismatch { expected: n, got: len });
            }
        }
        Ok(())
    }
}

/// Expected power gains of the three links during one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGains {
    /// Reader to tag.
    pub g_tg: f64,
    /// Tag to eavesdropper.
    pub g_ge: f64,
    /// Reader to eavesdropper.
    pub g_te: f64,
}

/// Expected power gains for every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub g_tg: Vec<f64>,
    pub g_ge: Vec<f64>,
    pub g_te: Vec<f64>,
}

impl LinkGains {
    pub fn slot(&self, n: usize) -> SlotGains {
        SlotGains { g_tg: self.g_tg[n], g_ge: self.g_ge[n], g_te: self.g_te[n] }
    }

    pub fn len(&self) -> usize {
        self.g_tg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_tg.is_empty()
    }
}

/// Closed interval of positions; `lo <= hi` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn intersect(self, other: Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// `K_tg = (y_t - y_g)^2 + h^2 + x_t^2`, the constant of the expanded
/// reader-to-tag distance.
pub fn k_tg(cfg: &ScenarioConfig) -> f64 {
    let [x_t, y_t, h] = cfg.infra_pos;
    (y_t - cfg.lane_y_tv).powi(2) + h * h + x_t * x_t
}

/// `K_ge = (y_e - y_g)^2 + x_e^2`.
pub fn k_ge(x_e: f64, cfg: &ScenarioConfig) -> f64 {
    (cfg.lane_y_ev - cfg.lane_y_tv).powi(2) + x_e * x_e
}

/// Reader-to-tag distance. Equal to `sqrt(x^2 - 2 x_t x + K_tg)`; evaluated
/// in the un-expanded form to avoid cancellation near `x_t`.
pub fn dist_infra_tv(x_g: f64, cfg: &ScenarioConfig) -> f64 {
    let [x_t, y_t, h] = cfg.infra_pos;
    let dx = x_t - x_g;
    let dy = y_t - cfg.lane_y_tv;
    (dx * dx + dy * dy + h * h).sqrt()
}

/// Tag-to-eavesdropper distance (both on the road surface).
pub fn dist_tv_ev(x_g: f64, x_e: f64, cfg: &ScenarioConfig) -> f64 {
    let dx = x_e - x_g;
    let dy = cfg.lane_y_ev - cfg.lane_y_tv;
    (dx * dx + dy * dy).sqrt()
}

/// Reader-to-eavesdropper distance, including the reader height.
pub fn dist_infra_ev(x_e: f64, cfg: &ScenarioConfig) -> f64 {
    let [x_t, y_t, h] = cfg.infra_pos;
    let dx = x_t - x_e;
    let dy = y_t - cfg.lane_y_ev;
    (dx * dx + dy * dy + h * h).sqrt()
}

fn gain(s: f64, d: f64, cfg: &ScenarioConfig, slot: usize, link: &'static str) -> Result<f64> {
    if d <= 0.0 {
        return Err(Error::DegenerateGeometry { slot, link });
    }
    Ok(s / d.powf(cfg.pathloss_exp))
}

/// Gains of the three links with the tag at `x_g` and the eavesdropper at `x_e`.
pub fn slot_gains(x_g: f64, x_e: f64, slot: usize, cfg: &ScenarioConfig) -> Result<SlotGains> {
    Ok(SlotGains {
        g_tg: gain(cfg.s_tg, dist_infra_tv(x_g, cfg), cfg, slot, "reader-tag")?,
        g_ge: gain(cfg.s_ge, dist_tv_ev(x_g, x_e, cfg), cfg, slot, "tag-eavesdropper")?,
        g_te: gain(cfg.s_te, dist_infra_ev(x_e, cfg), cfg, slot, "reader-eavesdropper")?,
    })
}

/// Gains for every slot given tag and eavesdropper positions.
pub fn link_gains(positions: &[f64], ev_positions: &[f64], cfg: &ScenarioConfig) -> Result<LinkGains> {
    let mut gains = LinkGains {
        g_tg: Vec::with_capacity(positions.len()),
        g_ge: Vec::with_capacity(positions.len()),
        g_te: Vec::with_capacity(positions.len()),
    };
    for (n, (&x_g, &x_e)) in positions.iter().zip(ev_positions).enumerate() {
        let g = slot_gains(x_g, x_e, n, cfg)?;
        gains.g_tg.push(g.g_tg);
        gains.g_ge.push(g.g_ge);
        gains.g_te.push(g.g_te);
    }
    Ok(gains)
}

/// Speed at the end of a slot under constant acceleration within the slot.
pub fn next_velocity(prev_pos: f64, prev_vel: f64, pos: f64, cfg: &ScenarioConfig) -> f64 {
    2.0 * (pos - prev_pos) / cfg.slot_duration - prev_vel
}

/// Constant acceleration over a slot that moves the vehicle from
/// `prev_pos` to `pos` starting at `prev_vel`.
pub fn slot_acceleration(prev_pos: f64, prev_vel: f64, pos: f64, cfg: &ScenarioConfig) -> f64 {
    let t = cfg.slot_duration;
    2.0 * (pos - prev_pos - prev_vel * t) / (t * t)
}

/// End-of-slot velocities implied by a position sequence, starting from
/// position 0 at [`ScenarioConfig::initial_velocity`].
pub fn velocities_from_positions(positions: &[f64], cfg: &ScenarioConfig) -> Vec<f64> {
    let mut prev_pos = 0.0;
    let mut prev_vel = cfg.initial_velocity();
    positions
        .iter()
        .map(|&x| {
            let v = next_velocity(prev_pos, prev_vel, x, cfg);
            prev_pos = x;
            prev_vel = v;
            v
        })
        .collect()
}

/// Farthest position reachable after `remaining` more slots, accelerating
/// as hard as the acceleration and speed limits allow.
pub fn max_reach(pos: f64, vel: f64, remaining: usize, cfg: &ScenarioConfig) -> f64 {
    let t = cfg.slot_duration;
    let (mut x, mut v) = (pos, vel);
    for _ in 0..remaining {
        let a = ((cfg.v_max - v) / t).clamp(cfg.a_min, cfg.a_max);
        x += v * t + 0.5 * a * t * t;
        v += a * t;
    }
    x
}

/// Shortfall allowed when checking that `min_distance` stays reachable.
const REACH_SLACK: f64 = 1e-10;

/// Positions admissible for slot `slot_index` given the state after the
/// previous slot.
///
/// Intersects the acceleration window, the velocity window, and the set of
/// positions from which `min_distance` can still be reached by the last
/// slot. Returns `None` when the intersection is empty.
pub fn feasible_interval(prev_pos: f64, prev_vel: f64, slot_index: usize, cfg: &ScenarioConfig) -> Option<Interval> {
    let t = cfg.slot_duration;
    let coast = prev_pos + prev_vel * t;
    let accel = Interval::new(coast + 0.5 * cfg.a_min * t * t, coast + 0.5 * cfg.a_max * t * t)?;
    let speed =
        Interval::new(prev_pos + 0.5 * (cfg.v_min + prev_vel) * t, prev_pos + 0.5 * (cfg.v_max + prev_vel) * t)?;
    let window = accel.intersect(speed)?;

    let remaining = cfg.n_slots.saturating_sub(slot_index + 1);
    // Reach is nondecreasing in x: a larger step also means a larger
    // end-of-slot speed.
    let shortfall = |x: f64| {
        let v = next_velocity(prev_pos, prev_vel, x, cfg).min(cfg.v_max);
        cfg.min_distance - max_reach(x, v, remaining, cfg)
    };
    if shortfall(window.hi) > REACH_SLACK {
        return None;
    }
    if shortfall(window.lo) <= 0.0 {
        return Some(window);
    }
    let (mut bad, mut good) = (window.lo, window.hi);
    for _ in 0..200 {
        let mid = 0.5 * (bad + good);
        if mid <= bad || mid >= good {
            break;
        }
        if shortfall(mid) <= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Interval::new(good, window.hi)
}

/// Loose reachability bound `L - remaining * v_max * t`; every position
/// admitted by [`feasible_interval`] also satisfies it.
pub fn coarse_reach_bound(slot_index: usize, cfg: &ScenarioConfig) -> f64 {
    let remaining = cfg.n_slots.saturating_sub(slot_index + 1) as f64;
    cfg.min_distance - remaining * cfg.v_max * cfg.slot_duration
}
