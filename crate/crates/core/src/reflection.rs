//! Reflection-coefficient stage.
//!
//! Slots decouple once powers and positions are fixed, so each slot runs
//! its own minorize-maximize loop: refresh the multipliers at the current
//! coefficient, then maximize the (concave in beta) surrogate by golden
//! section over the admissible range.
//!
//! The rate is often nearly flat in beta, where each loop step gains less
//! than the stopping threshold long before the peak. The loop is therefore
//! started from the best of the incumbent, the interval ends and the
//! stationary points of the rate: both SINRs are linear-fractional in
//! beta, so the numerator of the derivative is a quadratic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fp::{surrogate_rate, surrogate_terms, update_multipliers};
use crate::rate::{secrecy_gap, sinr_eavesdropper, sinr_legitimate};
use crate::scene::{dist_infra_tv, link_gains, ScenarioConfig, SlotGains, SlotPlan};

/// Cap on multiplier refreshes per slot.
const MAX_FP_ITERS: usize = 500;

/// Admissible reflection coefficients for one slot. Empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBounds {
    pub lo: f64,
    pub hi: f64,
}

impl BetaBounds {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// Open-interval margin on both sides, and the harvesting requirement
/// `(1 - beta) g_tg >= e_b` as an upper bound.
pub fn beta_bounds(x_g: f64, cfg: &ScenarioConfig) -> BetaBounds {
    let g_tg = cfg.s_tg / dist_infra_tv(x_g, cfg).powf(cfg.pathloss_exp);
    beta_bounds_for_gain(g_tg, cfg)
}

pub fn beta_bounds_for_gain(g_tg: f64, cfg: &ScenarioConfig) -> BetaBounds {
    let mut hi = 1.0 - cfg.beta_epsilon;
    if cfg.e_b > 0.0 {
        hi = hi.min(1.0 - cfg.e_b / g_tg);
    }
    BetaBounds { lo: cfg.beta_epsilon, hi }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Returns `(arg, value)`. The two endpoints are compared against the
/// interior estimate at the end, with ties going to the smallest argument.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if hi <= lo {
        return (lo, f(lo));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (mut arg, mut val) = (lo, f(lo));
    for (x, fx) in [(x1, f1), (x2, f2), (hi, f(hi))] {
        if fx > val {
            arg = x;
            val = fx;
        }
    }
    (arg, val)
}

/// True when `values` rise (weakly) and then fall (weakly), ignoring
/// differences below `tol` relative to the sample magnitude.
pub fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            continue;
        }
        let slack = tol * (1.0 + a.abs().min(b.abs()));
        if b < a - slack {
            falling = true;
        } else if b > a + slack && falling {
            return false;
        }
    }
    true
}

/// Sign-carrying numerator of `d gap / d beta` (positive factors dropped).
fn slope_numerator(gains: SlotGains, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> impl Fn(f64) -> f64 {
    let round_trip = gains.g_tg * gains.g_tg;
    let cascade = gains.g_ge * gains.g_tg;
    let (a, b, c) = (p_s * round_trip, cfg.alpha * p_a * round_trip, cfg.noise_reader);
    let (d, e, f) = (p_s * cascade, p_a * cascade, gains.g_te * p_a + cfg.noise_ev);
    move |beta| a * c * ((d + e) * beta + f) * (e * beta + f) - d * f * ((a + b) * beta + c) * (b * beta + c)
}

/// Stationary points of the slot's secrecy gap inside `bounds`.
pub fn stationary_betas(gains: SlotGains, p_s: f64, p_a: f64, bounds: BetaBounds, cfg: &ScenarioConfig) -> Vec<f64> {
    let h = slope_numerator(gains, p_s, p_a, cfg);
    let round_trip = gains.g_tg * gains.g_tg;
    let cascade = gains.g_ge * gains.g_tg;
    let (a, b, c) = (p_s * round_trip, cfg.alpha * p_a * round_trip, cfg.noise_reader);
    let (d, e, f) = (p_s * cascade, p_a * cascade, gains.g_te * p_a + cfg.noise_ev);
    let q2 = a * c * (d + e) * e - d * f * (a + b) * b;
    let q1 = c * f * (a * (d + 2.0 * e) - d * (a + 2.0 * b));
    let q0 = c * f * (a * f - d * c);
    let mut roots = Vec::new();
    let scale = q2.abs().max(q1.abs()).max(q0.abs());
    if scale == 0.0 {
        return roots;
    }
    let (q2, q1, q0) = (q2 / scale, q1 / scale, q0 / scale);
    if q2.abs() < 1e-14 {
        if q1 != 0.0 {
            roots.push(-q0 / q1);
        }
    } else {
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if disc >= 0.0 {
            let t = -0.5 * (q1 + q1.signum() * disc.sqrt());
            if t != 0.0 {
                roots.push(t / q2);
                roots.push(q0 / t);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.into_iter().filter(|r| r.is_finite()).filter_map(|r| polish_root(&h, r, bounds)).collect()
}

/// Refines an approximate sign change of `h` near `r` by bisection,
/// keeping it only if it lies within `bounds`.
fn polish_root(h: &impl Fn(f64) -> f64, r: f64, bounds: BetaBounds) -> Option<f64> {
    let r = r.clamp(bounds.lo, bounds.hi);
    let mut delta = 1e-12 * r.abs().max(1e-6);
    let (mut lo, mut hi);
    loop {
        lo = (r - delta).max(bounds.lo);
        hi = (r + delta).min(bounds.hi);
        if h(lo).signum() != h(hi).signum() {
            break;
        }
        if lo == bounds.lo && hi == bounds.hi || delta > 1e-3 {
            return None;
        }
        delta *= 4.0;
    }
    let s_lo = h(lo).signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Outcome of the per-slot loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotBetaResult {
    pub beta: f64,
    /// Clamped secrecy rate after each accepted iterate, starting point first.
    pub history: Vec<f64>,
}

/// Runs the multiplier/golden-section alternation for one slot from `beta0`.
pub fn optimize_slot_beta(
    gains: SlotGains,
    p_s: f64,
    p_a: f64,
    beta0: f64,
    bounds: BetaBounds,
    cfg: &ScenarioConfig,
) -> SlotBetaResult {
    let gap = |beta: f64| {
        secrecy_gap(sinr_legitimate(gains.g_tg, beta, p_s, p_a, cfg), sinr_eavesdropper(gains, beta, p_s, p_a, cfg))
    };
    let mut beta = beta0.clamp(bounds.lo, bounds.hi);
    let mut current = gap(beta);
    let mut history = vec![current.max(0.0)];

    let mut candidates = vec![bounds.lo, bounds.hi];
    candidates.extend(stationary_betas(gains, p_s, p_a, bounds, cfg));
    for b in candidates {
        let v = gap(b);
        if v > current {
            beta = b;
            current = v;
        }
    }
    if current.max(0.0) > history[0] {
        history.push(current.max(0.0));
    }

    for _ in 0..MAX_FP_ITERS {
        let m = update_multipliers(&surrogate_terms(gains, beta, p_s, p_a, cfg));
        let surrogate =
            |b: f64| surrogate_rate(&surrogate_terms(gains, b, p_s, p_a, cfg), m).unwrap_or(f64::NEG_INFINITY);
        debug_assert!(
            {
                let samples: Vec<f64> =
                    (0..200).map(|k| surrogate(bounds.lo + (bounds.hi - bounds.lo) * k as f64 / 199.0)).collect();
                is_unimodal(&samples, 1e-12)
            },
            "surrogate not unimodal in beta"
        );
        let (candidate, _) = golden_section_max(surrogate, bounds.lo, bounds.hi, cfg.tol_inner);
        let next = gap(candidate);
        if next < current {
            break;
        }
        let gain = next - current;
        let step = (candidate - beta).abs();
        beta = candidate;
        current = next;
        history.push(current.max(0.0));
        if gain <= cfg.tol_outer && step <= cfg.tol_inner.sqrt() {
            break;
        }
    }

    // Flat objective: prefer the smallest coefficient.
    if gap(bounds.lo).max(0.0) >= current.max(0.0) && beta != bounds.lo {
        beta = bounds.lo;
        current = gap(beta);
        *history.last_mut().expect("history is never empty") = current.max(0.0);
    }
    SlotBetaResult { beta, history }
}

/// Result of the reflection stage.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaOutcome {
    pub betas: Vec<f64>,
    /// Sum secrecy rate after each iteration; slots that converged early
    /// contribute their final value.
    pub trace: Vec<f64>,
}

/// Optimizes every slot's reflection coefficient for the plan's powers
/// and positions, starting from the plan's coefficients.
pub fn optimize_betas(plan: &SlotPlan, cfg: &ScenarioConfig) -> Result<BetaOutcome> {
    plan.check_len(cfg)?;
    let gains = link_gains(&plan.positions, &cfg.ev_positions(), cfg)?;
    let slots: Vec<SlotBetaResult> = (0..plan.n_slots())
        .into_par_iter()
        .map(|n| {
            let g = gains.slot(n);
            let bounds = beta_bounds_for_gain(g.g_tg, cfg);
            if bounds.is_empty() {
                return Err(Error::EnergyInfeasible { slot: n, lo: bounds.lo, hi: bounds.hi });
            }
            Ok(optimize_slot_beta(g, plan.power_cw[n], plan.power_an[n], plan.betas[n], bounds, cfg))
        })
        .collect::<Result<_>>()?;

    let rounds = slots.iter().map(|s| s.history.len()).max().unwrap_or(1);
    let trace = (0..rounds).map(|k| slots.iter().map(|s| s.history[k.min(s.history.len() - 1)]).sum()).collect();
    Ok(BetaOutcome { betas: slots.iter().map(|s| s.beta).collect(), trace })
}
