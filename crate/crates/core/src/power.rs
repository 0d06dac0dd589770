//! Carrier and artificial-noise power stage.
//!
//! With coefficients and positions fixed, the surrogate summed over slots is
//! concave in the `2N` powers and the only coupling is the total budget.
//! Each multiplier refresh is followed by a projected gradient ascent on
//! `{p >= 0, sum p <= P}` using Barzilai-Borwein trial steps and Armijo
//! backtracking.
//!
//! The surrogate loop alone creeps towards the optimum because the noise
//! powers end up orders of magnitude below the carrier powers. It is
//! therefore warm-started from a price-based allocation: for a price `mu`
//! per watt each slot picks its powers independently (the carrier power
//! has a closed form once the noise power is fixed, the noise power is a
//! scalar search), and `mu` is bisected until the budget is spent.

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::fp::{surrogate_terms, update_multipliers, FpMultipliers, SlotMultipliers};
use crate::rate::{secrecy_gap, sinr_eavesdropper, sinr_legitimate};
use crate::reflection::golden_section_max;
use crate::scene::{link_gains, LinkGains, ScenarioConfig, SlotPlan};

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_ASCENT_ITERS: usize = 10_000;
const MAX_FP_ITERS: usize = 200;
/// Log-spaced noise powers scanned per slot, plus zero.
const NOISE_SCAN: usize = 160;
/// Smallest scanned noise power relative to the budget.
const NOISE_FLOOR: f64 = 1e-12;
const PRICE_BISECTIONS: usize = 200;

/// Per-slot carrier and artificial-noise powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector {
    pub p_s: Vec<f64>,
    pub p_a: Vec<f64>,
}

impl PowerVector {
    pub fn uniform(n_slots: usize, budget: f64) -> Self {
        let each = budget / (2 * n_slots) as f64;
        Self { p_s: vec![each; n_slots], p_a: vec![each; n_slots] }
    }

    /// Carrier powers followed by noise powers.
    pub fn to_flat(&self) -> Vec<f64> {
        self.p_s.iter().chain(&self.p_a).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        let n = flat.len() / 2;
        Self { p_s: flat[..n].to_vec(), p_a: flat[n..].to_vec() }
    }

    pub fn total(&self) -> f64 {
        self.p_s.iter().chain(&self.p_a).sum()
    }
}

/// Euclidean projection onto `{x >= 0, sum x <= budget}`.
///
/// The simplex face is handled by bisecting on the water level and then
/// recomputing it exactly from the resulting support.
pub fn project_budget(v: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let excess = |theta: f64| v.iter().map(|&x| (x - theta).max(0.0)).sum::<f64>() - budget;
    let mut lo = 0.0;
    let mut hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let support: Vec<f64> = v.iter().copied().filter(|&x| x > lo).collect();
    let theta = (support.iter().sum::<f64>() - budget) / support.len() as f64;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Per-slot constants of the power subproblem.
#[derive(Debug, Clone, Copy)]
struct SlotCoeffs {
    /// `g_tg^2 beta`
    round_trip: f64,
    /// `g_ge g_tg beta`
    cascade: f64,
    g_te: f64,
}

fn coeffs(gains: &LinkGains, betas: &[f64]) -> Vec<SlotCoeffs> {
    (0..gains.len())
        .map(|n| SlotCoeffs {
            round_trip: gains.g_tg[n] * gains.g_tg[n] * betas[n],
            cascade: gains.g_ge[n] * gains.g_tg[n] * betas[n],
            g_te: gains.g_te[n],
        })
        .collect()
}

impl SlotCoeffs {
    /// Legitimate SINR per watt of carrier at noise power `p_a`.
    fn reader_gain(&self, p_a: f64, cfg: &ScenarioConfig) -> f64 {
        self.round_trip / (cfg.alpha * self.round_trip * p_a + cfg.noise_reader)
    }

    /// Eavesdropper SINR per watt of carrier at noise power `p_a`.
    fn eav_gain(&self, p_a: f64, cfg: &ScenarioConfig) -> f64 {
        self.cascade / ((self.cascade + self.g_te) * p_a + cfg.noise_ev)
    }

    /// Secrecy gap in nats.
    fn gap_nats(&self, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> f64 {
        (self.reader_gain(p_a, cfg) * p_s).ln_1p() - (self.eav_gain(p_a, cfg) * p_s).ln_1p()
    }

    /// Carrier power maximizing `gap - price * p_s` on `[0, cap]` at fixed
    /// `p_a`. The gap is concave in `p_s` whenever it is increasing, and
    /// the first-order condition is a quadratic.
    fn carrier_response(&self, p_a: f64, price: f64, cap: f64, cfg: &ScenarioConfig) -> f64 {
        let a = self.reader_gain(p_a, cfg);
        let b = self.eav_gain(p_a, cfg);
        if a - b <= price || cap <= 0.0 {
            return 0.0;
        }
        if price <= 0.0 {
            return cap;
        }
        let excess = (a - b) / price - 1.0;
        let p = 2.0 * excess / ((a + b) + ((a + b).powi(2) + 4.0 * a * b * excess).sqrt());
        p.min(cap)
    }

    /// `(p_s, p_a, lagrangian)` for one slot at `price` (nats per watt).
    fn price_response(&self, price: f64, budget: f64, cfg: &ScenarioConfig) -> (f64, f64, f64) {
        let lagrangian = |p_a: f64| {
            let p_s = self.carrier_response(p_a, price, budget - p_a, cfg);
            (p_s, self.gap_nats(p_s, p_a, cfg) - price * (p_s + p_a))
        };
        let grid: Vec<f64> = std::iter::once(0.0)
            .chain((0..NOISE_SCAN).map(|k| budget * NOISE_FLOOR.powf(1.0 - k as f64 / (NOISE_SCAN - 1) as f64)))
            .collect();
        let mut best_k = 0;
        let mut best = lagrangian(0.0);
        for (k, &p_a) in grid.iter().enumerate().skip(1) {
            let v = lagrangian(p_a);
            if v.1 > best.1 {
                best = v;
                best_k = k;
            }
        }
        if best_k == 0 {
            return (best.0, 0.0, best.1);
        }
        // Refine on the slope (envelope theorem: p_s is already optimal).
        let slope = |p_a: f64| {
            let p_s = self.carrier_response(p_a, price, budget - p_a, cfg);
            let a = self.reader_gain(p_a, cfg);
            let b = self.eav_gain(p_a, cfg);
            let da = -a * cfg.alpha * self.round_trip / (cfg.alpha * self.round_trip * p_a + cfg.noise_reader);
            let db = -b * (self.cascade + self.g_te) / ((self.cascade + self.g_te) * p_a + cfg.noise_ev);
            p_s * (da / (1.0 + a * p_s) - db / (1.0 + b * p_s)) - price
        };
        let (mut lo, mut hi) = (grid[best_k - 1], grid[(best_k + 1).min(grid.len() - 1)]);
        let (p_a, val) = if slope(lo) > 0.0 && slope(hi) < 0.0 {
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let p_a = 0.5 * (lo + hi);
            (p_a, lagrangian(p_a).1)
        } else {
            golden_section_max(|p| lagrangian(p).1, lo, hi, 1e-15 * hi)
        };
        if val >= best.1 {
            (lagrangian(p_a).0, p_a, val)
        } else {
            (best.0, grid[best_k], best.1)
        }
    }
}

/// Powers chosen by every slot independently at budget price `price`.
fn allocation_at(coeffs: &[SlotCoeffs], price: f64, cfg: &ScenarioConfig) -> (Vec<f64>, f64) {
    let n = coeffs.len();
    let mut x = vec![0.0; 2 * n];
    for (k, c) in coeffs.iter().enumerate() {
        let (p_s, p_a, _) = c.price_response(price, cfg.power_budget, cfg);
        x[k] = p_s;
        x[n + k] = p_a;
    }
    let total = x.iter().sum();
    (x, total)
}

/// Price-based allocation spending (at most) the whole budget.
fn priced_allocation(coeffs: &[SlotCoeffs], cfg: &ScenarioConfig) -> Vec<f64> {
    let budget = cfg.power_budget;
    let n = coeffs.len();
    if budget <= 0.0 {
        return vec![0.0; 2 * n];
    }
    // Above this price no slot transmits.
    let ceiling = coeffs.iter().map(|c| c.reader_gain(0.0, cfg)).fold(0.0, f64::max);
    if ceiling <= 0.0 {
        return vec![0.0; 2 * n];
    }
    let (mut lo, mut hi) = (ceiling * 1e-30, ceiling);
    let (low_alloc, low_total) = allocation_at(coeffs, lo, cfg);
    if low_total <= budget {
        return low_alloc;
    }
    let mut feasible = allocation_at(coeffs, hi, cfg).0;
    for _ in 0..PRICE_BISECTIONS {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi || hi / lo - 1.0 < 1e-15 {
            break;
        }
        let (alloc, total) = allocation_at(coeffs, mid, cfg);
        if total > budget {
            lo = mid;
        } else {
            hi = mid;
            feasible = alloc;
        }
    }
    project_budget(&feasible, budget)
}

/// The two log arguments of one slot's surrogate and their partials with
/// respect to `(p_s, p_a)`.
struct SlotEval {
    first: f64,
    second: f64,
    d_first: (f64, f64),
    d_second_pa: f64,
}

fn eval_slot(c: SlotCoeffs, y: SlotMultipliers, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> SlotEval {
    let reader_noise = cfg.alpha * p_a * c.round_trip + cfg.noise_reader;
    let reader_total = p_s * c.round_trip + reader_noise;
    let eav_noise = (c.cascade + c.g_te) * p_a + cfg.noise_ev;
    let eav_total = c.cascade * p_s + eav_noise;
    let sqrt_t = reader_total.sqrt();
    let sqrt_e = eav_noise.sqrt();
    SlotEval {
        first: 2.0 * y.y1 * sqrt_t - y.y1 * y.y1 * eav_total,
        second: 2.0 * y.y2 * sqrt_e - y.y2 * y.y2 * reader_noise,
        d_first: (
            y.y1 * c.round_trip / sqrt_t - y.y1 * y.y1 * c.cascade,
            y.y1 * cfg.alpha * c.round_trip / sqrt_t - y.y1 * y.y1 * (c.cascade + c.g_te),
        ),
        d_second_pa: y.y2 * (c.cascade + c.g_te) / sqrt_e - y.y2 * y.y2 * cfg.alpha * c.round_trip,
    }
}

/// Context of one power-stage solve: the fixed coefficients and positions.
pub struct PowerProblem<'a> {
    coeffs: Vec<SlotCoeffs>,
    cfg: &'a ScenarioConfig,
}

impl<'a> PowerProblem<'a> {
    pub fn new(gains: &LinkGains, betas: &[f64], cfg: &'a ScenarioConfig) -> Self {
        Self { coeffs: coeffs(gains, betas), cfg }
    }

    pub fn n_slots(&self) -> usize {
        self.coeffs.len()
    }

    /// Sum of slot surrogates at flat powers `x`; `-inf` outside the domain.
    pub fn objective(&self, x: &[f64], y: &FpMultipliers) -> f64 {
        let n = self.n_slots();
        let mut total = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let e = eval_slot(c, y.slot(k), x[k], x[n + k], self.cfg);
            if !(e.first > 0.0 && e.second > 0.0) {
                return f64::NEG_INFINITY;
            }
            total += e.first.log2() + e.second.log2();
        }
        total
    }

    /// Analytic gradient of [`PowerProblem::objective`].
    pub fn gradient(&self, x: &[f64], y: &FpMultipliers) -> Vec<f64> {
        let n = self.n_slots();
        let mut g = vec![0.0; 2 * n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let e = eval_slot(c, y.slot(k), x[k], x[n + k], self.cfg);
            g[k] = e.d_first.0 / (e.first * LN_2);
            g[n + k] = (e.d_first.1 / e.first + e.d_second_pa / e.second) / LN_2;
        }
        g
    }

    /// Multipliers making the surrogate tight at `x`.
    pub fn multipliers(&self, x: &[f64], gains: &LinkGains, betas: &[f64]) -> FpMultipliers {
        let n = self.n_slots();
        let mut y = FpMultipliers::default();
        for k in 0..n {
            y.push(update_multipliers(&surrogate_terms(gains.slot(k), betas[k], x[k], x[n + k], self.cfg)));
        }
        y
    }

    /// `||Proj(x + grad) - x||_inf`, zero exactly at a constrained stationary point.
    pub fn projected_gradient_norm(&self, x: &[f64], y: &FpMultipliers) -> f64 {
        let g = self.gradient(x, y);
        let moved: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
        project_budget(&moved, self.cfg.power_budget).iter().zip(x).map(|(p, a)| (p - a).abs()).fold(0.0, f64::max)
    }

    /// Maximizes the surrogate at fixed multipliers from a feasible start.
    pub fn ascend(&self, start: &[f64], y: &FpMultipliers) -> Vec<f64> {
        let budget = self.cfg.power_budget;
        let tol = self.cfg.tol_inner * budget.max(1.0);
        let mut x = project_budget(start, budget);
        let mut f = self.objective(&x, y);
        let mut g = self.gradient(&x, y);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut step = if gmax > 0.0 { budget.max(1e-12) / gmax } else { 1.0 };

        for _ in 0..MAX_ASCENT_ITERS {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let target = project_budget(&trial, budget);
            let dir: Vec<f64> = target.iter().zip(&x).map(|(t, a)| t - a).collect();
            let dir_norm = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if dir_norm <= tol * step.min(1.0) {
                break;
            }
            let slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| (a + lambda * d).max(0.0)).collect();
                let fc = self.objective(&cand, y);
                if fc >= f + ARMIJO * lambda * slope {
                    accepted = Some((cand, fc));
                    break;
                }
                lambda *= SHRINK;
            }
            let Some((next, f_next)) = accepted else { break };
            let g_next = self.gradient(&next, y);
            let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let ss: f64 = s.iter().map(|v| v * v).sum();
            let sy: f64 = s.iter().zip(g_next.iter().zip(&g)).map(|(si, (a, b))| si * (a - b)).sum();
            step = if sy < 0.0 { (ss / -sy).clamp(1e-20, 1e20) } else { step * 2.0 };
            let stalled = f_next - f <= 1e-15 * f.abs().max(1.0) && ss == 0.0;
            x = next;
            f = f_next;
            g = g_next;
            if stalled {
                break;
            }
        }
        x
    }
}

/// Result of the power stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerOutcome {
    pub powers: PowerVector,
    /// Best clamped sum secrecy rate after each multiplier refresh.
    pub trace: Vec<f64>,
    /// Stationarity of the final surrogate solve.
    pub projected_gradient_norm: f64,
}

fn clamped_and_gap(x: &[f64], gains: &LinkGains, betas: &[f64], cfg: &ScenarioConfig) -> (f64, f64) {
    let n = betas.len();
    let mut clamped = 0.0;
    let mut gap_sum = 0.0;
    for k in 0..n {
        let g = gains.slot(k);
        let gap = secrecy_gap(
            sinr_legitimate(g.g_tg, betas[k], x[k], x[n + k], cfg),
            sinr_eavesdropper(g, betas[k], x[k], x[n + k], cfg),
        );
        clamped += gap.max(0.0);
        gap_sum += gap;
    }
    (clamped, gap_sum)
}

/// Optimizes the powers for the plan's coefficients and positions,
/// starting from the plan's powers. Never returns powers with a lower sum
/// secrecy rate than the starting point.
pub fn optimize_power(plan: &SlotPlan, cfg: &ScenarioConfig) -> Result<PowerOutcome> {
    plan.check_len(cfg)?;
    let gains = link_gains(&plan.positions, &cfg.ev_positions(), cfg)?;
    let problem = PowerProblem::new(&gains, &plan.betas, cfg);
    let start = PowerVector { p_s: plan.power_cw.clone(), p_a: plan.power_an.clone() };
    let mut x = project_budget(&start.to_flat(), cfg.power_budget);
    let (mut best_val, mut gap) = clamped_and_gap(&x, &gains, &plan.betas, cfg);
    let mut trace = vec![best_val];

    let priced = priced_allocation(&problem.coeffs, cfg);
    let (priced_val, priced_gap) = clamped_and_gap(&priced, &gains, &plan.betas, cfg);
    if priced_val > best_val {
        x = priced;
        best_val = priced_val;
        gap = priced_gap;
    }
    trace.push(best_val);
    let mut best = x.clone();
    let mut pg_norm = f64::NAN;

    for _ in 0..MAX_FP_ITERS {
        let y = problem.multipliers(&x, &gains, &plan.betas);
        let next = problem.ascend(&x, &y);
        pg_norm = problem.projected_gradient_norm(&next, &y);
        let (val, next_gap) = clamped_and_gap(&next, &gains, &plan.betas, cfg);
        if val > best_val {
            best_val = val;
            best = next.clone();
        }
        trace.push(best_val);
        let improvement = next_gap - gap;
        x = next;
        gap = next_gap;
        if improvement <= cfg.tol_outer {
            break;
        }
    }
    Ok(PowerOutcome { powers: PowerVector::from_flat(&best), trace, projected_gradient_norm: pg_norm })
}
