//! Quadratic-transform surrogate of the per-slot secrecy gap.
//!
//! The gap `R_t - R_e = log2(T / E) + log2(denE / denT)` is a sum of two
//! log-ratios. Each ratio `x / z` is replaced by `2 y sqrt(x) - y^2 z`,
//! which is concave in `(x, z)` for fixed `y`, never exceeds `x / z`, and
//! equals it at `y = sqrt(x) / z`. Alternating the closed-form `y` update
//! with a maximization over the decision variables therefore never lowers
//! the true gap.

use crate::scene::{ScenarioConfig, SlotGains};

/// Power aggregates of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateTerms {
    /// Everything the reader receives: signal, residual noise, thermal noise.
    pub reader_total: f64,
    /// Everything the eavesdropper receives.
    pub eav_total: f64,
    /// Eavesdropper interference plus noise.
    pub eav_noise_part: f64,
    /// Reader interference plus noise.
    pub reader_noise_part: f64,
}

/// Auxiliary variables of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotMultipliers {
    pub y1: f64,
    pub y2: f64,
}

/// Auxiliary variables for every slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FpMultipliers {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl FpMultipliers {
    pub fn slot(&self, n: usize) -> SlotMultipliers {
        SlotMultipliers { y1: self.y1[n], y2: self.y2[n] }
    }

    pub fn push(&mut self, m: SlotMultipliers) {
        self.y1.push(m.y1);
        self.y2.push(m.y2);
    }
}

pub fn surrogate_terms(gains: SlotGains, beta: f64, p_s: f64, p_a: f64, cfg: &ScenarioConfig) -> SurrogateTerms {
    let round_trip = gains.g_tg * gains.g_tg * beta;
    let cascade = gains.g_ge * gains.g_tg * beta;
    let reader_noise_part = cfg.alpha * p_a * round_trip + cfg.noise_reader;
    let eav_noise_part = cascade * p_a + gains.g_te * p_a + cfg.noise_ev;
    SurrogateTerms {
        reader_total: p_s * round_trip + reader_noise_part,
        eav_total: cascade * p_s + eav_noise_part,
        eav_noise_part,
        reader_noise_part,
    }
}

/// Multipliers that make the surrogate tight at `terms`.
pub fn update_multipliers(terms: &SurrogateTerms) -> SlotMultipliers {
    SlotMultipliers {
        y1: terms.reader_total.sqrt() / terms.eav_total,
        y2: terms.eav_noise_part.sqrt() / terms.reader_noise_part,
    }
}

/// Surrogate of the unclamped gap; `None` when a log argument is not positive.
pub fn surrogate_rate(terms: &SurrogateTerms, m: SlotMultipliers) -> Option<f64> {
    let first = 2.0 * m.y1 * terms.reader_total.sqrt() - m.y1 * m.y1 * terms.eav_total;
    let second = 2.0 * m.y2 * terms.eav_noise_part.sqrt() - m.y2 * m.y2 * terms.reader_noise_part;
    (first > 0.0 && second > 0.0).then(|| first.log2() + second.log2())
}
