//! Alternating optimization: reflection, then power, then trajectory,
//! repeated until the sum secrecy rate stops improving.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::power::{optimize_power, PowerVector};
use crate::rate::sum_secrecy;
use crate::reflection::{beta_bounds_for_gain, optimize_betas};
use crate::scene::{link_gains, velocities_from_positions, ScenarioConfig, SlotPlan};
use crate::trajectory::optimize_trajectory;

pub const MAX_OUTER_ITERS: usize = 50;

/// Convergence record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct AoTrace {
    /// Sum secrecy rate of the baseline plan.
    pub baseline: f64,
    /// Sum secrecy rate after each outer iteration.
    pub objectives: Vec<f64>,
    /// Sum secrecy rate after the reflection, power and trajectory stages
    /// of each outer iteration.
    pub stage_objectives: Vec<[f64; 3]>,
    pub iterations: usize,
    /// Seconds.
    pub wall_time: f64,
}

impl AoTrace {
    pub fn final_objective(&self) -> f64 {
        self.objectives.last().copied().unwrap_or(self.baseline)
    }

    /// First outer iteration (1-based) whose improvement over its
    /// predecessor is at most `threshold`.
    pub fn converged_at(&self, threshold: f64) -> Option<usize> {
        let mut prev = self.baseline;
        for (k, &v) in self.objectives.iter().enumerate() {
            if v - prev <= threshold {
                return Some(k + 1);
            }
            prev = v;
        }
        None
    }

    /// Objective before each stage followed by the objective after it,
    /// for every stage executed.
    pub fn stage_steps(&self) -> Vec<(f64, f64)> {
        let mut steps = Vec::new();
        let mut prev = self.baseline;
        for triple in &self.stage_objectives {
            for &v in triple {
                steps.push((prev, v));
                prev = v;
            }
        }
        steps
    }
}

/// Equal carrier and noise powers `P / 2N`, uniform speed over
/// `min_distance`, and reflection coefficient 0.5 (or the harvesting
/// bound, if lower).
pub fn baseline_plan(cfg: &ScenarioConfig) -> Result<SlotPlan> {
    cfg.validate()?;
    let n = cfg.n_slots;
    let speed = cfg.uniform_speed();
    if speed < cfg.v_min || speed > cfg.v_max {
        return Err(Error::BaselineInfeasible { speed, v_min: cfg.v_min, v_max: cfg.v_max });
    }
    let positions: Vec<f64> =
        (1..=n).map(|k| if k == n { cfg.min_distance } else { cfg.min_distance * k as f64 / n as f64 }).collect();
    let gains = link_gains(&positions, &cfg.ev_positions(), cfg)?;
    let betas = (0..n)
        .map(|k| {
            let b = beta_bounds_for_gain(gains.g_tg[k], cfg);
            if b.is_empty() {
                Err(Error::EnergyInfeasible { slot: k, lo: b.lo, hi: b.hi })
            } else {
                Ok(0.5f64.clamp(b.lo, b.hi))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let powers = PowerVector::uniform(n, cfg.power_budget);
    Ok(SlotPlan {
        velocities: velocities_from_positions(&positions, cfg),
        positions,
        betas,
        power_cw: powers.p_s,
        power_an: powers.p_a,
    })
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage { stage: name, source: Box::new(e) })
}

/// Runs the three stages in turn from the baseline plan. A stage's output
/// replaces the incumbent only if it does not lower the sum secrecy rate.
pub fn run_ao(cfg: &ScenarioConfig) -> Result<(SlotPlan, AoTrace)> {
    let started = Instant::now();
    let mut plan = baseline_plan(cfg)?;
    let baseline = sum_secrecy(&plan, cfg)?;
    let mut current = baseline;
    let mut objectives = Vec::new();
    let mut stage_objectives = Vec::new();

    for _ in 0..MAX_OUTER_ITERS {
        let start_of_round = current;

        let betas = stage("reflection", optimize_betas(&plan, cfg))?.betas;
        let candidate = SlotPlan { betas, ..plan.clone() };
        current = adopt_if_better(&mut plan, candidate, current, cfg)?;
        let after_beta = current;

        let powers = stage("power", optimize_power(&plan, cfg))?.powers;
        let candidate = SlotPlan { power_cw: powers.p_s, power_an: powers.p_a, ..plan.clone() };
        current = adopt_if_better(&mut plan, candidate, current, cfg)?;
        let after_power = current;

        let (positions, velocities) = stage("trajectory", optimize_trajectory(&plan, cfg))?;
        let candidate = SlotPlan { positions, velocities, ..plan.clone() };
        current = adopt_if_better(&mut plan, candidate, current, cfg)?;

        objectives.push(current);
        stage_objectives.push([after_beta, after_power, current]);
        if current - start_of_round <= cfg.tol_outer {
            break;
        }
    }

    let trace = AoTrace {
        baseline,
        iterations: objectives.len(),
        objectives,
        stage_objectives,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok((plan, trace))
}

fn adopt_if_better(plan: &mut SlotPlan, candidate: SlotPlan, current: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let value = sum_secrecy(&candidate, cfg)?;
    if value >= current {
        *plan = candidate;
        Ok(value)
    } else {
        Ok(current)
    }
}
