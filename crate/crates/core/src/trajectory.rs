//! Trajectory stage.
//!
//! With coefficients and powers fixed, a slot's secrecy rate depends only
//! on that slot's position. The maximizer over the admissible interval is
//! either an interval end or a stationary point of
//! `A(x) = (1 + gamma_t) / (1 + gamma_e)`, so each slot evaluates that
//! finite candidate set. Slots are chained forward because each position
//! fixes the kinematic state the next slot starts from.

use crate::error::{Error, Result};
use crate::rate::{secrecy_rate, sinr_eavesdropper, sinr_legitimate};
use crate::scene::{
    dist_infra_tv, dist_tv_ev, feasible_interval, next_velocity, slot_gains, Interval, ScenarioConfig, SlotPlan,
};

/// Derivative samples per interval when bracketing stationary points.
pub const SCAN_SAMPLES: usize = 2048;
/// Final bracket width of each refined stationary point (m).
pub const ROOT_WIDTH: f64 = 1e-10;

/// Everything about a slot except the tag position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotContext {
    pub slot: usize,
    pub beta: f64,
    pub p_s: f64,
    pub p_a: f64,
    /// Eavesdropper position during the slot.
    pub x_e: f64,
}

impl SlotContext {
    pub fn from_plan(plan: &SlotPlan, slot: usize, cfg: &ScenarioConfig) -> Self {
        Self {
            slot,
            beta: plan.betas[slot],
            p_s: plan.power_cw[slot],
            p_a: plan.power_an[slot],
            x_e: cfg.ev_position(slot),
        }
    }
}

/// Interval corners plus the stationary points of `A` inside the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub corners: [f64; 2],
    pub gradient_points: Vec<f64>,
}

impl CandidateSet {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.corners.iter().chain(&self.gradient_points).copied()
    }
}

fn sinrs(x_g: f64, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<(f64, f64)> {
    let g = slot_gains(x_g, ctx.x_e, ctx.slot, cfg)?;
    Ok((
        sinr_legitimate(g.g_tg, ctx.beta, ctx.p_s, ctx.p_a, cfg),
        sinr_eavesdropper(g, ctx.beta, ctx.p_s, ctx.p_a, cfg),
    ))
}

/// `(1 + gamma_t) / (1 + gamma_e)` with the tag at `x_g`.
pub fn ratio_a(x_g: f64, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<f64> {
    let (gt, ge) = sinrs(x_g, ctx, cfg)?;
    Ok((1.0 + gt) / (1.0 + ge))
}

/// Clamped secrecy rate with the tag at `x_g`.
pub fn slot_secrecy_at(x_g: f64, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<f64> {
    let (gt, ge) = sinrs(x_g, ctx, cfg)?;
    Ok(secrecy_rate(gt, ge))
}

/// `d ln A / dx`, same sign as `dA/dx`.
fn log_ratio_slope(x: f64, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<f64> {
    let g = slot_gains(x, ctx.x_e, ctx.slot, cfg)?;
    let i = cfg.pathloss_exp;
    // Logarithmic derivatives of the two position-dependent gains.
    let dln_tg = -i * (x - cfg.infra_pos[0]) / dist_infra_tv(x, cfg).powi(2);
    let dln_ge = -i * (x - ctx.x_e) / dist_tv_ev(x, ctx.x_e, cfg).powi(2);

    let round_trip = ctx.beta * g.g_tg * g.g_tg;
    let reader_den = cfg.alpha * ctx.p_a * round_trip + cfg.noise_reader;
    let gamma_t = ctx.p_s * round_trip / reader_den;
    let d_gamma_t = ctx.p_s * cfg.noise_reader / (reader_den * reader_den) * round_trip * 2.0 * dln_tg;

    let cascade = ctx.beta * g.g_tg * g.g_ge;
    let rest = g.g_te * ctx.p_a + cfg.noise_ev;
    let eav_den = ctx.p_a * cascade + rest;
    let gamma_e = ctx.p_s * cascade / eav_den;
    let d_gamma_e = ctx.p_s * rest / (eav_den * eav_den) * cascade * (dln_tg + dln_ge);

    Ok(d_gamma_t / (1.0 + gamma_t) - d_gamma_e / (1.0 + gamma_e))
}

/// Stationary points of `A` on `interval`: sign changes of the sampled
/// derivative, each refined by bisection to [`ROOT_WIDTH`].
pub fn critical_points(interval: Interval, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    if interval.width() <= 0.0 {
        return Ok(Vec::new());
    }
    let step = interval.width() / (SCAN_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..SCAN_SAMPLES)
        .map(|k| if k + 1 == SCAN_SAMPLES { interval.hi } else { interval.lo + step * k as f64 })
        .collect();
    let slopes = xs.iter().map(|&x| log_ratio_slope(x, ctx, cfg)).collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for k in 0..SCAN_SAMPLES - 1 {
        let (s0, s1) = (slopes[k], slopes[k + 1]);
        if s0 == 0.0 {
            roots.push(xs[k]);
            continue;
        }
        if s0.signum() == s1.signum() || s1 == 0.0 {
            continue;
        }
        let (mut a, mut b) = (xs[k], xs[k + 1]);
        while b - a > ROOT_WIDTH {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if log_ratio_slope(mid, ctx, cfg)?.signum() == s0.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if slopes[SCAN_SAMPLES - 1] == 0.0 {
        roots.push(interval.hi);
    }
    Ok(roots)
}

pub fn candidate_set(interval: Interval, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<CandidateSet> {
    Ok(CandidateSet { corners: [interval.lo, interval.hi], gradient_points: critical_points(interval, ctx, cfg)? })
}

/// Best candidate of `interval`; ties go to the larger position.
pub fn best_in_interval(interval: Interval, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<(f64, f64)> {
    let candidates = candidate_set(interval, ctx, cfg)?;
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for x in candidates.iter() {
        let r = slot_secrecy_at(x, ctx, cfg)?;
        if r > best.1 || (r == best.1 && x > best.0) {
            best = (x, r);
        }
    }
    Ok(best)
}

/// Positions where the harvesting requirement holds for coefficient `beta`:
/// `s_tg / d_tg^i >= e_b / (1 - beta)`. `None` means nowhere on the road.
fn harvesting_window(beta: f64, cfg: &ScenarioConfig) -> Option<Interval> {
    if cfg.e_b <= 0.0 {
        return Some(Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY });
    }
    let [x_t, y_t, h] = cfg.infra_pos;
    let d_max = (cfg.s_tg * (1.0 - beta) / cfg.e_b).powf(1.0 / cfg.pathloss_exp);
    let reach2 = d_max * d_max - (y_t - cfg.lane_y_tv).powi(2) - h * h;
    if reach2 < 0.0 {
        return None;
    }
    let r = reach2.sqrt();
    Some(Interval { lo: x_t - r, hi: x_t + r })
}

/// Best admissible position for one slot given the state after the
/// previous slot.
pub fn optimize_position_slot(prev_pos: f64, prev_vel: f64, ctx: &SlotContext, cfg: &ScenarioConfig) -> Result<f64> {
    let slot = ctx.slot;
    let kinematic = feasible_interval(prev_pos, prev_vel, slot, cfg).ok_or(Error::InfeasibleKinematics { slot })?;
    let interval = harvesting_window(ctx.beta, cfg)
        .and_then(|w| Interval::new(kinematic.lo.max(w.lo), kinematic.hi.min(w.hi)))
        .ok_or(Error::EnergyInfeasible { slot, lo: cfg.beta_epsilon, hi: ctx.beta })?;
    Ok(best_in_interval(interval, ctx, cfg)?.0)
}

/// Positions and end-of-slot velocities chosen slot by slot from `x = 0`.
pub fn optimize_trajectory(plan: &SlotPlan, cfg: &ScenarioConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    plan.check_len(cfg)?;
    let mut positions = Vec::with_capacity(cfg.n_slots);
    let mut velocities = Vec::with_capacity(cfg.n_slots);
    let (mut prev_pos, mut prev_vel) = (0.0, cfg.initial_velocity());
    for n in 0..cfg.n_slots {
        let ctx = SlotContext::from_plan(plan, n, cfg);
        let x = optimize_position_slot(prev_pos, prev_vel, &ctx, cfg)?;
        let v = next_velocity(prev_pos, prev_vel, x, cfg);
        positions.push(x);
        velocities.push(v);
        prev_pos = x;
        prev_vel = v;
    }
    Ok((positions, velocities))
}
