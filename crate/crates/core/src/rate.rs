//! SINRs, link rates and the clamped secrecy rate.

use crate::error::Result;
use crate::scene::{link_gains, ScenarioConfig, SlotGains, SlotPlan};

/// Rates of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRates {
    pub gamma_t: f64,
    pub gamma_e: f64,
    pub rate_t: f64,
    pub rate_e: f64,
    /// `max(rate_t - rate_e, 0)`.
    pub secrecy: f64,
}

/// SINR at the reader. The monostatic round trip squares the reader-tag gain;
/// a fraction `alpha` of the backscattered artificial noise survives
/// cancellation.
pub fn sinr_legitimate(g_tg: f64, beta: f64, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> f64 {
    let round_trip = g_tg * g_tg * beta;
    p_s * round_trip / (cfg.alpha * p_a * round_trip + cfg.noise_reader)
}

/// SINR at the eavesdropper, which cannot cancel any artificial noise:
/// it hears the backscattered noise plus the direct noise from the reader.
pub fn sinr_eavesdropper(gains: SlotGains, beta: f64, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> f64 {
    let cascade = gains.g_ge * gains.g_tg * beta;
    cascade * p_s / (cascade * p_a + gains.g_te * p_a + cfg.noise_ev)
}

/// `max(log2((1 + gamma_t) / (1 + gamma_e)), 0)`.
pub fn secrecy_rate(gamma_t: f64, gamma_e: f64) -> f64 {
    secrecy_gap(gamma_t, gamma_e).max(0.0)
}

/// Unclamped `log2(1 + gamma_t) - log2(1 + gamma_e)`.
pub fn secrecy_gap(gamma_t: f64, gamma_e: f64) -> f64 {
    ((1.0 + gamma_t) / (1.0 + gamma_e)).log2()
}

pub fn slot_rates(gains: SlotGains, beta: f64, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> SlotRates {
    let gamma_t = sinr_legitimate(gains.g_tg, beta, p_s, p_a, cfg);
    let gamma_e = sinr_eavesdropper(gains, beta, p_s, p_a, cfg);
    SlotRates {
        gamma_t,
        gamma_e,
        rate_t: gamma_t.ln_1p() / std::f64::consts::LN_2,
        rate_e: gamma_e.ln_1p() / std::f64::consts::LN_2,
        secrecy: secrecy_rate(gamma_t, gamma_e),
    }
}

/// Per-slot rates of a whole plan.
pub fn plan_rates(plan: &SlotPlan, cfg: &ScenarioConfig) -> Result<Vec<SlotRates>> {
    plan.check_len(cfg)?;
    let gains = link_gains(&plan.positions, &cfg.ev_positions(), cfg)?;
    Ok((0..plan.n_slots())
        .map(|n| slot_rates(gains.slot(n), plan.betas[n], plan.power_cw[n], plan.power_an[n], cfg))
        .collect())
}

/// Sum secrecy rate over all slots, the quantity every stage maximizes.
pub fn sum_secrecy(plan: &SlotPlan, cfg: &ScenarioConfig) -> Result<f64> {
    Ok(plan_rates(plan, cfg)?.iter().map(|r| r.secrecy).sum())
}
