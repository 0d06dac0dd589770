//! Brute-force reference computations.
//!
//! Nothing here calls into the optimized modules: distances, gains, SINRs
//! and the constraint audit are written out again from the model
//! equations so that agreement with the optimizers is evidence rather than
//! a tautology. Performance is not a concern.

use crate::error::{Error, Result};
use crate::power::PowerVector;
use crate::scene::{Interval, ScenarioConfig, SlotPlan};

/// Uniform grid of `steps` points over `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub steps: usize,
    pub lo: f64,
    pub hi: f64,
}

impl GridSpec {
    pub fn new(steps: usize, lo: f64, hi: f64) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Oracle("a grid needs at least two points".into()));
        }
        Ok(Self { steps, lo, hi })
    }

    /// Grid with spacing at most `spacing`.
    pub fn with_spacing(lo: f64, hi: f64, spacing: f64) -> Self {
        let steps = (((hi - lo) / spacing).ceil() as usize + 1).max(2);
        Self { steps, lo, hi }
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
        }
    }
}

/// Grid argmax; the first (lowest) point wins ties.
pub fn grid_argmax(f: impl Fn(f64) -> f64, grid: GridSpec) -> (f64, f64) {
    let mut best = (grid.point(0), f(grid.point(0)));
    for k in 1..grid.steps {
        let x = grid.point(k);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Secrecy rate of a single slot from first principles.
///
/// The eavesdropper's cascaded gain is written through the product
/// `D = d_ge^i d_tg^i`, with `d_tg^2 = x^2 - 2 x_t x + K_tg`.
pub fn reference_slot_secrecy(x_g: f64, x_e: f64, beta: f64, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> f64 {
    let i = cfg.pathloss_exp;
    let [x_t, y_t, h] = cfg.infra_pos;
    let k_tg = (y_t - cfg.lane_y_tv).powi(2) + h * h + x_t * x_t;
    let k_ge = (cfg.lane_y_ev - cfg.lane_y_tv).powi(2) + x_e * x_e;
    let d_tg_sq = x_g * x_g - 2.0 * x_t * x_g + k_tg;
    let d_ge_sq = x_g * x_g - 2.0 * x_e * x_g + k_ge;
    let d_te_sq = (x_t - x_e).powi(2) + (y_t - cfg.lane_y_ev).powi(2) + h * h;
    let d_big = d_ge_sq.powf(i / 2.0) * d_tg_sq.powf(i / 2.0);

    let reader_gain_sq = cfg.s_tg * cfg.s_tg * d_tg_sq.powf(-i);
    let gamma_t = p_s * reader_gain_sq * beta / (cfg.alpha * beta * p_a * reader_gain_sq + cfg.noise_reader);
    let cascade = cfg.s_ge * cfg.s_tg * beta / d_big;
    let direct = cfg.s_te * d_te_sq.powf(-i / 2.0);
    let gamma_e = cascade * p_s / (cascade * p_a + direct * p_a + cfg.noise_ev);
    let r = (1.0 + gamma_t).log2() - (1.0 + gamma_e).log2();
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

fn eavesdropper_x(cfg: &ScenarioConfig, slot: usize) -> f64 {
    cfg.ev_x0 + cfg.ev_speed * cfg.slot_duration * (slot as f64 + 1.0)
}

/// Sum secrecy rate of a plan, slot by slot from first principles.
pub fn reference_sum_secrecy(plan: &SlotPlan, cfg: &ScenarioConfig) -> f64 {
    (0..plan.positions.len())
        .map(|n| {
            reference_slot_secrecy(
                plan.positions[n],
                eavesdropper_x(cfg, n),
                plan.betas[n],
                plan.power_cw[n],
                plan.power_an[n],
                cfg,
            )
        })
        .sum()
}

/// One slot's fixed quantities for the beta and position oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSlot {
    pub slot: usize,
    pub x_g: f64,
    pub beta: f64,
    pub p_s: f64,
    pub p_a: f64,
}

/// Best reflection coefficient on the grid for one slot.
pub fn grid_beta_oracle(s: OracleSlot, cfg: &ScenarioConfig, grid: GridSpec) -> (f64, f64) {
    let x_e = eavesdropper_x(cfg, s.slot);
    grid_argmax(|b| reference_slot_secrecy(s.x_g, x_e, b, s.p_s, s.p_a, cfg), grid)
}

/// Best position on a dense uniform grid of `interval`; ties go to the
/// larger position.
pub fn dense_position_oracle(interval: Interval, s: OracleSlot, cfg: &ScenarioConfig, steps: usize) -> (f64, f64) {
    let x_e = eavesdropper_x(cfg, s.slot);
    let f = |x: f64| reference_slot_secrecy(x, x_e, s.beta, s.p_s, s.p_a, cfg);
    if interval.hi <= interval.lo || steps < 2 {
        return (interval.lo, f(interval.lo));
    }
    let grid = GridSpec { steps, lo: interval.lo, hi: interval.hi };
    let mut best = (grid.point(0), f(grid.point(0)));
    for k in 1..steps {
        let x = grid.point(k);
        let v = f(x);
        if v >= best.1 {
            best = (x, v);
        }
    }
    best
}

/// Exhaustive search over power grids with spacing `P / steps` for one or
/// two slots, subject to the total budget.
pub fn grid_power_oracle(plan: &SlotPlan, cfg: &ScenarioConfig, steps: usize) -> Result<(PowerVector, f64)> {
    let n = plan.positions.len();
    if !(1..=2).contains(&n) {
        return Err(Error::Oracle(format!("power grid supports one or two slots, got {n}")));
    }
    let unit = cfg.power_budget / steps as f64;
    let table = |slot: usize| -> Vec<Vec<f64>> {
        let x_e = eavesdropper_x(cfg, slot);
        (0..=steps)
            .map(|i| {
                (0..=steps - i)
                    .map(|j| {
                        reference_slot_secrecy(
                            plan.positions[slot],
                            x_e,
                            plan.betas[slot],
                            unit * i as f64,
                            unit * j as f64,
                            cfg,
                        )
                    })
                    .collect()
            })
            .collect()
    };

    let first = table(0);
    if n == 1 {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in first.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let powers = PowerVector { p_s: vec![unit * best.0 as f64], p_a: vec![unit * best.1 as f64] };
        return Ok((powers, best.2));
    }

    let second = table(1);
    let mut best = ([0usize; 4], f64::NEG_INFINITY);
    for (i1, row1) in first.iter().enumerate() {
        for (j1, &v1) in row1.iter().enumerate() {
            let left = steps - i1 - j1;
            for (i2, row2) in second.iter().enumerate().take(left + 1) {
                for (j2, &v2) in row2.iter().enumerate().take(left - i2 + 1) {
                    if v1 + v2 > best.1 {
                        best = ([i1, j1, i2, j2], v1 + v2);
                    }
                }
            }
        }
    }
    let [i1, j1, i2, j2] = best.0;
    let powers =
        PowerVector { p_s: vec![unit * i1 as f64, unit * i2 as f64], p_a: vec![unit * j1 as f64, unit * j2 as f64] };
    Ok((powers, best.1))
}

/// Euclidean projection onto `{x >= 0, sum x <= budget}` by sorting.
pub fn sorted_simplex_projection(v: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - budget) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| if x - theta > 0.0 { x - theta } else { 0.0 }).collect()
}

/// A constraint the audited plan breaks.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    pub slot: Option<usize>,
    pub detail: String,
}

/// Checks every problem constraint on `plan`, recomputing velocities and
/// accelerations from the positions. Sign constraints are exact; continuous
/// bounds allow `tol`.
pub fn audit_constraints(plan: &SlotPlan, cfg: &ScenarioConfig, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |constraint: &'static str, slot: Option<usize>, detail: String| {
        out.push(Violation { constraint, slot, detail });
    };
    let n = plan.positions.len();
    if n != cfg.n_slots {
        flag("shape", None, format!("{n} slots, expected {}", cfg.n_slots));
        return out;
    }
    let t = cfg.slot_duration;
    let [x_t, y_t, h] = cfg.infra_pos;
    let mut total_power = 0.0;
    let mut prev_x = 0.0;
    let mut prev_v = (cfg.min_distance / (n as f64 * t)).clamp(cfg.v_min, cfg.v_max);
    for k in 0..n {
        let beta = plan.betas[k];
        if !(beta > 0.0 && beta < 1.0) || beta < cfg.beta_epsilon - tol || beta > 1.0 - cfg.beta_epsilon + tol {
            flag("C1", Some(k), format!("beta = {beta}"));
        }
        let d2 = (x_t - plan.positions[k]).powi(2) + (y_t - cfg.lane_y_tv).powi(2) + h * h;
        let harvested = (1.0 - beta) * cfg.s_tg / d2.powf(cfg.pathloss_exp / 2.0);
        if harvested < cfg.e_b - tol {
            flag("C2", Some(k), format!("harvested {harvested} < {}", cfg.e_b));
        }
        let (p_s, p_a) = (plan.power_cw[k], plan.power_an[k]);
        if p_s < 0.0 || p_a < 0.0 {
            flag("C3", Some(k), format!("negative power ({p_s}, {p_a})"));
        }
        total_power += p_s + p_a;

        let x = plan.positions[k];
        let accel = 2.0 * (x - prev_x - prev_v * t) / (t * t);
        let v = prev_v + accel * t;
        if v < cfg.v_min - tol || v > cfg.v_max + tol {
            flag("C6", Some(k), format!("velocity {v}"));
        }
        if accel < cfg.a_min - tol || accel > cfg.a_max + tol {
            flag("C7", Some(k), format!("acceleration {accel}"));
        }
        if (v - plan.velocities[k]).abs() > tol * v.abs().max(1.0) {
            flag("velocity bookkeeping", Some(k), format!("stored {} vs recomputed {v}", plan.velocities[k]));
        }
        if x <= prev_x {
            flag("monotone positions", Some(k), format!("{x} after {prev_x}"));
        }
        prev_x = x;
        prev_v = v;
    }
    if total_power > cfg.power_budget + tol {
        flag("C3", None, format!("total power {total_power} > {}", cfg.power_budget));
    }
    if prev_x < cfg.min_distance - tol {
        flag("C5", None, format!("final position {prev_x} < {}", cfg.min_distance));
    }
    out
}
