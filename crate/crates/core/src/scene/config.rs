//! Scenario parameters and the flat key-value config file.
//!
//! A config file is TOML with top-level keys only, one per field of
//! [`ScenarioConfig`]. Keys that are absent take the reference defaults
//! for the file's `n_slots`, `slot_duration` and `ev_speed`: the covered
//! distance defaults to `n_slots * ev_speed * slot_duration` and the
//! reader sits above the midpoint of that stretch at `(L/2, 8, 3)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Every physical constant, kinematic bound, budget and solver tolerance.
///
/// Units: metres, seconds, watts. Noise powers are in watts (see
/// [`dbm_to_watts`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of coherence slots.
    pub n_slots: usize,
    /// Slot length in seconds.
    pub slot_duration: f64,
    /// Lateral coordinate of the tag vehicle's lane.
    pub lane_y_tv: f64,
    /// Lateral coordinate of the eavesdropper's lane.
    pub lane_y_ev: f64,
    /// Reader position `(x, y, height)`.
    pub infra_pos: [f64; 3],
    /// Eavesdropper speed (m/s).
    pub ev_speed: f64,
    /// Eavesdropper longitudinal offset at time zero.
    pub ev_x0: f64,
    /// Minimum distance the tag vehicle must cover by the last slot.
    pub min_distance: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// Total carrier plus artificial-noise energy budget over all slots (W).
    pub power_budget: f64,
    /// Residual fraction of backscattered artificial noise after cancellation.
    pub alpha: f64,
    pub noise_reader: f64,
    pub noise_ev: f64,
    pub pathloss_exp: f64,
    pub s_tg: f64,
    pub s_ge: f64,
    pub s_te: f64,
    /// Minimum power the tag must harvest per slot (W).
    pub e_b: f64,
    /// Outer stopping threshold on the sum secrecy rate (bps/Hz).
    pub tol_outer: f64,
    /// Scalar-search width and first-order stationarity tolerance.
    pub tol_inner: f64,
    /// Margin keeping reflection coefficients inside the open unit interval.
    pub beta_epsilon: f64,
}

impl ScenarioConfig {
    /// Reference scenario for `n_slots` slots.
    pub fn reference(n_slots: usize) -> Self {
        Self::derived_defaults(n_slots, 0.05, 30.0)
    }

    fn derived_defaults(n_slots: usize, slot_duration: f64, ev_speed: f64) -> Self {
        let min_distance = n_slots as f64 * ev_speed * slot_duration;
        let noise = dbm_to_watts(-80.0);
        Self {
            n_slots,
            slot_duration,
            lane_y_tv: 0.0,
            lane_y_ev: 3.5,
            infra_pos: [min_distance / 2.0, 8.0, 3.0],
            ev_speed,
            ev_x0: 0.0,
            min_distance,
            v_min: 17.0,
            v_max: 40.0,
            a_min: -5.0,
            a_max: 5.0,
            power_budget: 20.0,
            alpha: 0.5,
            noise_reader: noise,
            noise_ev: noise,
            pathloss_exp: 2.0,
            s_tg: 0.2,
            s_ge: 0.2,
            s_te: 0.2,
            e_b: 0.0,
            tol_outer: 1e-6,
            tol_inner: 1e-8,
            beta_epsilon: 1e-6,
        }
    }

    /// Builds a config from a flat key-value table, filling absent keys
    /// with the defaults derived from the table's slot count, slot length
    /// and eavesdropper speed.
    pub fn from_table(table: &toml::Table) -> Result<Self> {
        let partial: PartialConfig =
            table.clone().try_into().map_err(|e: toml::de::Error| Error::ConfigFile(e.message().to_string()))?;
        let cfg = partial.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::ConfigFile(e.message().to_string()))?;
        Self::from_table(&table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigFile(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Checks the parameter invariants, including that `min_distance` is
    /// coverable at `v_max`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            ("slot_duration", self.slot_duration),
            ("lane_y_tv", self.lane_y_tv),
            ("lane_y_ev", self.lane_y_ev),
            ("infra_pos.x", self.infra_pos[0]),
            ("infra_pos.y", self.infra_pos[1]),
            ("infra_pos.h", self.infra_pos[2]),
            ("ev_speed", self.ev_speed),
            ("ev_x0", self.ev_x0),
            ("min_distance", self.min_distance),
            ("v_min", self.v_min),
            ("v_max", self.v_max),
            ("a_min", self.a_min),
            ("a_max", self.a_max),
            ("power_budget", self.power_budget),
            ("alpha", self.alpha),
            ("noise_reader", self.noise_reader),
            ("noise_ev", self.noise_ev),
            ("pathloss_exp", self.pathloss_exp),
            ("e_b", self.e_b),
            ("tol_outer", self.tol_outer),
            ("tol_inner", self.tol_inner),
            ("beta_epsilon", self.beta_epsilon),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return fail(format!("{name} must be finite"));
        }
        if self.n_slots == 0 {
            return fail("n_slots must be at least 1".into());
        }
        if self.slot_duration <= 0.0 {
            return fail("slot_duration must be positive".into());
        }
        if self.noise_reader <= 0.0 || self.noise_ev <= 0.0 {
            return fail("noise powers must be positive".into());
        }
        if self.power_budget < 0.0 {
            return fail("power_budget must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha = {} outside [0, 1]", self.alpha));
        }
        if self.pathloss_exp < 1.0 {
            return fail("pathloss_exp must be at least 1".into());
        }
        if !(self.s_tg > 0.0 && self.s_ge > 0.0 && self.s_te > 0.0) {
            return fail("path-loss constants must be positive".into());
        }
        if self.e_b < 0.0 {
            return fail("e_b must be non-negative".into());
        }
        if self.v_min > self.v_max {
            return fail(format!("v_min {} exceeds v_max {}", self.v_min, self.v_max));
        }
        if self.v_min < 0.0 {
            return fail("v_min must be non-negative".into());
        }
        if self.a_min > 0.0 || self.a_max < 0.0 {
            return fail("acceleration bounds must bracket zero".into());
        }
        if !(self.beta_epsilon > 0.0 && self.beta_epsilon < 0.5) {
            return fail("beta_epsilon must lie in (0, 0.5)".into());
        }
        if self.tol_outer <= 0.0 || self.tol_inner <= 0.0 {
            return fail("tolerances must be positive".into());
        }
        let coverable = self.n_slots as f64 * self.v_max * self.slot_duration;
        if self.min_distance > coverable {
            return fail(format!(
                "min_distance {} exceeds n_slots * v_max * slot_duration = {coverable}",
                self.min_distance
            ));
        }
        Ok(())
    }

    /// Speed before the first slot: the uniform speed `L / (N t)` clamped
    /// into the velocity window.
    pub fn initial_velocity(&self) -> f64 {
        self.uniform_speed().clamp(self.v_min, self.v_max)
    }

    /// Speed that covers `min_distance` exactly in `n_slots` equal steps.
    pub fn uniform_speed(&self) -> f64 {
        self.min_distance / (self.n_slots as f64 * self.slot_duration)
    }

    /// Eavesdropper longitudinal position during slot `slot` (0-based).
    pub fn ev_position(&self, slot: usize) -> f64 {
        self.ev_x0 + self.ev_speed * self.slot_duration * (slot + 1) as f64
    }

    pub fn ev_positions(&self) -> Vec<f64> {
        (0..self.n_slots).map(|n| self.ev_position(n)).collect()
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::reference(20)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    n_slots: Option<usize>,
    slot_duration: Option<f64>,
    lane_y_tv: Option<f64>,
    lane_y_ev: Option<f64>,
    infra_pos: Option<[f64; 3]>,
    ev_speed: Option<f64>,
    ev_x0: Option<f64>,
    min_distance: Option<f64>,
    v_min: Option<f64>,
    v_max: Option<f64>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    power_budget: Option<f64>,
    alpha: Option<f64>,
    noise_reader: Option<f64>,
    noise_ev: Option<f64>,
    pathloss_exp: Option<f64>,
    s_tg: Option<f64>,
    s_ge: Option<f64>,
    s_te: Option<f64>,
    e_b: Option<f64>,
    tol_outer: Option<f64>,
    tol_inner: Option<f64>,
    beta_epsilon: Option<f64>,
}

impl PartialConfig {
    fn resolve(self) -> ScenarioConfig {
        let base = ScenarioConfig::derived_defaults(
            self.n_slots.unwrap_or(20),
            self.slot_duration.unwrap_or(0.05),
            self.ev_speed.unwrap_or(30.0),
        );
        // The reader defaults to the midpoint of the covered stretch, so an
        // explicit min_distance moves it too.
        let min_distance = self.min_distance.unwrap_or(base.min_distance);
        let infra_default = [min_distance / 2.0, base.infra_pos[1], base.infra_pos[2]];
        ScenarioConfig {
            n_slots: base.n_slots,
            slot_duration: base.slot_duration,
            lane_y_tv: self.lane_y_tv.unwrap_or(base.lane_y_tv),
            lane_y_ev: self.lane_y_ev.unwrap_or(base.lane_y_ev),
            infra_pos: self.infra_pos.unwrap_or(infra_default),
            ev_speed: base.ev_speed,
            ev_x0: self.ev_x0.unwrap_or(base.ev_x0),
            min_distance,
            v_min: self.v_min.unwrap_or(base.v_min),
            v_max: self.v_max.unwrap_or(base.v_max),
            a_min: self.a_min.unwrap_or(base.a_min),
            a_max: self.a_max.unwrap_or(base.a_max),
            power_budget: self.power_budget.unwrap_or(base.power_budget),
            alpha: self.alpha.unwrap_or(base.alpha),
            noise_reader: self.noise_reader.unwrap_or(base.noise_reader),
            noise_ev: self.noise_ev.unwrap_or(base.noise_ev),
            pathloss_exp: self.pathloss_exp.unwrap_or(base.pathloss_exp),
            s_tg: self.s_tg.unwrap_or(base.s_tg),
            s_ge: self.s_ge.unwrap_or(base.s_ge),
            s_te: self.s_te.unwrap_or(base.s_te),
            e_b: self.e_b.unwrap_or(base.e_b),
            tol_outer: self.tol_outer.unwrap_or(base.tol_outer),
            tol_inner: self.tol_inner.unwrap_or(base.tol_inner),
            beta_epsilon: self.beta_epsilon.unwrap_or(base.beta_epsilon),
        }
    }
}
