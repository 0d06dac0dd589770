//! Experiment presets and their CSV output.
//!
//! Every preset is a list of sweep points. A point is a set of key
//! overrides applied on top of the user's config table before defaults are
//! filled in, so derived defaults (covered distance, reader position)
//! follow the swept values unless the user pinned them.
//!
//! Output files, all with a header row and LF line endings:
//!
//! - `summary.csv`: one row per point with the baseline and optimized sum
//!   secrecy rate, their ratio, outer iterations and wall time;
//! - `slots.csv`: the final plan of every point, one row per slot;
//! - `trace.csv`: sum secrecy rate after each stage of each outer iteration;
//! - `beta_optima.csv` and `beta_curve_*.csv` for `beta_sweep`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::ao::{run_ao, AoTrace};
use crate::error::{Error, Result};
use crate::rate::{plan_rates, slot_rates, SlotRates};
use crate::reflection::{beta_bounds_for_gain, is_unimodal, optimize_slot_beta};
use crate::scene::{dist_infra_tv, slot_gains, ScenarioConfig, SlotPlan};

/// Named experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Outer-loop convergence for `N` = 20, 30, 40, 50.
    Convergence,
    /// Secrecy rate against the reflection coefficient at fixed slots.
    BetaSweep,
    /// Power budgets 10, 20, 30 W crossed with slot lengths 0.1 to 0.2 s.
    PowerBudget,
    /// Reader offset from the road crossed with speed windows.
    DistanceVelocity,
    /// The config as given.
    Single,
    /// `N` = 20..50 with `L = N v_c` and one-second slots.
    UnitSlots,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Convergence,
        Preset::BetaSweep,
        Preset::PowerBudget,
        Preset::DistanceVelocity,
        Preset::Single,
        Preset::UnitSlots,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Convergence => "convergence",
            Preset::BetaSweep => "beta_sweep",
            Preset::PowerBudget => "power_budget",
            Preset::DistanceVelocity => "distance_velocity",
            Preset::Single => "single",
            Preset::UnitSlots => "unit_slots",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Key overrides of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub overrides: Vec<(&'static str, toml::Value)>,
    /// Keys set only when the user's table leaves them out.
    pub soft: Vec<(&'static str, toml::Value)>,
}

impl SweepPoint {
    fn new() -> Self {
        Self { overrides: Vec::new(), soft: Vec::new() }
    }

    fn set(mut self, key: &'static str, value: impl Into<toml::Value>) -> Self {
        self.overrides.push((key, value.into()));
        self
    }

    fn default_to(mut self, key: &'static str, value: impl Into<toml::Value>) -> Self {
        self.soft.push((key, value.into()));
        self
    }

    /// Config of this point on top of `base`.
    pub fn config(&self, base: &toml::Table) -> Result<ScenarioConfig> {
        let mut table = base.clone();
        for (key, value) in &self.soft {
            table.entry(key.to_string()).or_insert_with(|| value.clone());
        }
        for (key, value) in &self.overrides {
            table.insert(key.to_string(), value.clone());
        }
        ScenarioConfig::from_table(&table)
    }
}

const SLOT_COUNTS: [i64; 4] = [20, 30, 40, 50];
const BUDGETS: [f64; 3] = [10.0, 20.0, 30.0];
const SLOT_LENGTHS: [f64; 3] = [0.1, 0.15, 0.2];
const READER_OFFSETS: [f64; 5] = [4.0, 6.0, 8.0, 10.0, 12.0];
const SPEED_WINDOWS: [(f64, f64); 3] = [(17.0, 40.0), (25.0, 35.0), (28.0, 32.0)];
/// Tag positions and eavesdropper lead distances of the reflection sweep.
pub const SWEEP_POSITIONS: [f64; 6] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0];
pub const SWEEP_EV_OFFSETS: [f64; 2] = [0.0, 30.0];
/// Spacing of the reflection-coefficient grid in the sweep curves.
pub const SWEEP_BETA_STEP: f64 = 1e-3;

/// Sweep points of an AO preset. `beta_sweep` has a single point holding
/// its base scenario.
pub fn sweep_points(preset: Preset) -> Vec<SweepPoint> {
    match preset {
        Preset::Convergence => {
            SLOT_COUNTS.iter().map(|&n| SweepPoint::new().set("n_slots", n).default_to("tol_outer", 1e-3)).collect()
        }
        Preset::UnitSlots => {
            SLOT_COUNTS.iter().map(|&n| SweepPoint::new().set("n_slots", n).set("slot_duration", 1.0)).collect()
        }
        Preset::PowerBudget => SLOT_LENGTHS
            .iter()
            .flat_map(|&t| {
                BUDGETS.iter().map(move |&p| SweepPoint::new().set("slot_duration", t).set("power_budget", p))
            })
            .collect(),
        Preset::DistanceVelocity => SPEED_WINDOWS
            .iter()
            .flat_map(|&(lo, hi)| {
                READER_OFFSETS
                    .iter()
                    .map(move |&y| SweepPoint::new().set("v_min", lo).set("v_max", hi).set("reader_offset", y))
            })
            .collect(),
        Preset::BetaSweep => {
            vec![SweepPoint::new().default_to(
                "infra_pos",
                toml::Value::Array([50.0, 8.0, 3.0].into_iter().map(toml::Value::from).collect()),
            )]
        }
        Preset::Single => vec![SweepPoint::new()],
    }
}

/// Resolves a point, handling the pseudo-key `reader_offset` (lateral
/// reader coordinate, keeping the default longitudinal position).
fn resolve_point(point: &SweepPoint, base: &toml::Table) -> Result<ScenarioConfig> {
    let offset = point.overrides.iter().find(|(k, _)| *k == "reader_offset");
    let Some((_, value)) = offset else {
        return point.config(base);
    };
    let y = value.as_float().ok_or_else(|| Error::InvalidConfig("reader_offset must be a number".into()))?;
    let plain = SweepPoint {
        overrides: point.overrides.iter().filter(|(k, _)| *k != "reader_offset").cloned().collect(),
        soft: point.soft.clone(),
    };
    let mut cfg = plain.config(base)?;
    cfg.infra_pos[1] = y;
    cfg.validate()?;
    Ok(cfg)
}

/// Optimization result of one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub cfg: ScenarioConfig,
    pub plan: SlotPlan,
    pub trace: AoTrace,
    pub rates: Vec<SlotRates>,
}

impl PointResult {
    /// Optimized over baseline sum secrecy rate; infinite when the
    /// baseline is zero and the optimum is not.
    pub fn ratio(&self) -> f64 {
        let (base, opt) = (self.trace.baseline, self.trace.final_objective());
        if base > 0.0 {
            opt / base
        } else if opt > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }
}

pub fn run_point(cfg: ScenarioConfig) -> Result<PointResult> {
    let (plan, trace) = run_ao(&cfg)?;
    let rates = plan_rates(&plan, &cfg)?;
    Ok(PointResult { cfg, plan, trace, rates })
}

/// Runs every point of an AO preset, in parallel, in sweep order.
pub fn run_preset(preset: Preset, base: &toml::Table) -> Result<Vec<PointResult>> {
    let configs = sweep_points(preset).iter().map(|p| resolve_point(p, base)).collect::<Result<Vec<_>>>()?;
    configs.into_par_iter().map(run_point).collect()
}

/// One `R(beta)` curve of the reflection sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCurve {
    pub x_g: f64,
    /// Eavesdropper lead over the tag vehicle.
    pub ev_offset: f64,
    pub d_tg: f64,
    /// `(beta, secrecy rate)` on a uniform grid over the feasible interval.
    pub samples: Vec<(f64, f64)>,
    /// Output of the reflection optimizer started from 0.5.
    pub beta_opt: f64,
    pub rate_opt: f64,
}

impl BetaCurve {
    pub fn is_unimodal(&self) -> bool {
        let rates: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        is_unimodal(&rates, 1e-12)
    }

    /// Best grid sample.
    pub fn grid_best(&self) -> (f64, f64) {
        self.samples.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b })
    }
}

/// Reflection sweep at fixed baseline powers `P / 2N`: one curve per tag
/// position and eavesdropper lead.
pub fn beta_sweep(cfg: &ScenarioConfig) -> Result<Vec<BetaCurve>> {
    cfg.validate()?;
    let power = cfg.power_budget / (2 * cfg.n_slots) as f64;
    let mut curves = Vec::new();
    for &ev_offset in &SWEEP_EV_OFFSETS {
        for &x_g in &SWEEP_POSITIONS {
            let gains = slot_gains(x_g, x_g + ev_offset, 0, cfg)?;
            let bounds = beta_bounds_for_gain(gains.g_tg, cfg);
            if bounds.is_empty() {
                return Err(Error::EnergyInfeasible { slot: 0, lo: bounds.lo, hi: bounds.hi });
            }
            let steps = ((bounds.hi - bounds.lo) / SWEEP_BETA_STEP).round().max(1.0) as usize;
            let samples = (0..=steps)
                .map(|k| {
                    let beta = if k == steps {
                        bounds.hi
                    } else {
                        bounds.lo + (bounds.hi - bounds.lo) * k as f64 / steps as f64
                    };
                    (beta, slot_rates(gains, beta, power, power, cfg).secrecy)
                })
                .collect();
            let result = optimize_slot_beta(gains, power, power, 0.5, bounds, cfg);
            curves.push(BetaCurve {
                x_g,
                ev_offset,
                d_tg: dist_infra_tv(x_g, cfg),
                samples,
                beta_opt: result.beta,
                rate_opt: slot_rates(gains, result.beta, power, power, cfg).secrecy,
            });
        }
    }
    Ok(curves)
}

/// Formats with 12 significant digits, fixed-point for moderate
/// magnitudes and exponent form otherwise.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| Error::Output(format!("{}: {e}", path.display()));
    writer.write_record(header).map_err(fail)?;
    for row in rows {
        writer.write_record(row).map_err(fail)?;
    }
    writer.flush().map_err(|e| Error::Output(format!("{}: {e}", path.display())))
}

/// Output switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    /// Record wall time in `summary.csv`; zero otherwise, which makes every
    /// file byte-for-byte reproducible.
    pub timing: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "preset",
    "point",
    "n_slots",
    "slot_duration",
    "power_budget",
    "reader_y",
    "v_min",
    "v_max",
    "min_distance",
    "baseline",
    "optimized",
    "ratio",
    "iterations",
    "wall_time_s",
];
pub const SLOTS_HEADER: [&str; 11] =
    ["point", "slot", "x_g", "v_t", "beta", "p_s", "p_a", "gamma_t", "gamma_e", "rate", "x_e"];
pub const TRACE_HEADER: [&str; 6] =
    ["point", "iteration", "after_reflection", "after_power", "after_trajectory", "delta"];

/// Writes `summary.csv`, `slots.csv` and `trace.csv` for AO results.
pub fn write_results(preset: Preset, results: &[PointResult], out: &Path, opts: OutputOptions) -> Result<()> {
    let mut summary = Vec::new();
    let mut slots = Vec::new();
    let mut trace = Vec::new();
    for (k, r) in results.iter().enumerate() {
        let c = &r.cfg;
        let wall = if opts.timing { r.trace.wall_time } else { 0.0 };
        summary.push(vec![
            preset.name().to_string(),
            k.to_string(),
            c.n_slots.to_string(),
            fmt_num(c.slot_duration),
            fmt_num(c.power_budget),
            fmt_num(c.infra_pos[1]),
            fmt_num(c.v_min),
            fmt_num(c.v_max),
            fmt_num(c.min_distance),
            fmt_num(r.trace.baseline),
            fmt_num(r.trace.final_objective()),
            fmt_num(r.ratio()),
            r.trace.iterations.to_string(),
            fmt_num(wall),
        ]);
        for (n, rate) in r.rates.iter().enumerate() {
            slots.push(vec![
                k.to_string(),
                n.to_string(),
                fmt_num(r.plan.positions[n]),
                fmt_num(r.plan.velocities[n]),
                fmt_num(r.plan.betas[n]),
                fmt_num(r.plan.power_cw[n]),
                fmt_num(r.plan.power_an[n]),
                fmt_num(rate.gamma_t),
                fmt_num(rate.gamma_e),
                fmt_num(rate.secrecy),
                fmt_num(c.ev_position(n)),
            ]);
        }
        let mut prev = r.trace.baseline;
        for (it, stages) in r.trace.stage_objectives.iter().enumerate() {
            trace.push(vec![
                k.to_string(),
                (it + 1).to_string(),
                fmt_num(stages[0]),
                fmt_num(stages[1]),
                fmt_num(stages[2]),
                fmt_num(stages[2] - prev),
            ]);
            prev = stages[2];
        }
    }
    write_rows(&out.join("summary.csv"), &SUMMARY_HEADER, &summary)?;
    write_rows(&out.join("slots.csv"), &SLOTS_HEADER, &slots)?;
    write_rows(&out.join("trace.csv"), &TRACE_HEADER, &trace)
}

/// Writes `beta_optima.csv` and one `beta_curve_<k>.csv` per curve.
pub fn write_beta_sweep(curves: &[BetaCurve], out: &Path) -> Result<()> {
    let mut optima = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        let (grid_beta, grid_rate) = c.grid_best();
        optima.push(vec![
            k.to_string(),
            fmt_num(c.ev_offset),
            fmt_num(c.x_g),
            fmt_num(c.d_tg),
            fmt_num(c.beta_opt),
            fmt_num(c.rate_opt),
            fmt_num(grid_beta),
            fmt_num(grid_rate),
            c.is_unimodal().to_string(),
        ]);
        let rows: Vec<Vec<String>> = c.samples.iter().map(|&(b, r)| vec![fmt_num(b), fmt_num(r)]).collect();
        write_rows(&out.join(format!("beta_curve_{k}.csv")), &["beta", "rate"], &rows)?;
    }
    write_rows(
        &out.join("beta_optima.csv"),
        &["curve", "ev_offset", "x_g", "d_tg", "beta_opt", "rate_opt", "grid_beta", "grid_rate", "unimodal"],
        &optima,
    )
}

/// Short human-readable report of a finished preset.
pub fn report(preset: Preset, results: &[PointResult]) -> String {
    let mut s = String::new();
    for (k, r) in results.iter().enumerate() {
        let _ = writeln!(
            s,
            "{} #{k}: N={} P={} t={}  baseline {:.4}  optimized {:.4}  x{:.3}  ({} iterations)",
            preset.name(),
            r.cfg.n_slots,
            r.cfg.power_budget,
            r.cfg.slot_duration,
            r.trace.baseline,
            r.trace.final_objective(),
            r.ratio(),
            r.trace.iterations,
        );
    }
    s
}

/// Runs a preset and writes its files into `out` (created if missing),
/// including the effective config of every point.
pub fn run_experiment(preset: Preset, base: &toml::Table, out: &Path, opts: OutputOptions) -> Result<String> {
    fs::create_dir_all(out).map_err(|e| Error::Output(format!("{}: {e}", out.display())))?;
    let started = Instant::now();
    let points = sweep_points(preset);
    let configs = points.iter().map(|p| resolve_point(p, base)).collect::<Result<Vec<_>>>()?;
    let mut effective = String::new();
    for (k, cfg) in configs.iter().enumerate() {
        let _ = writeln!(effective, "# point {k}\n{}", cfg.to_toml_string());
    }
    fs::write(out.join("effective_config.toml"), effective)
        .map_err(|e| Error::Output(format!("{}: {e}", out.display())))?;

    if preset == Preset::BetaSweep {
        let curves = beta_sweep(&configs[0])?;
        write_beta_sweep(&curves, out)?;
        let mut s = String::new();
        for c in &curves {
            let _ = writeln!(
                s,
                "ev_offset {:>4} x_g {:>4} d_tg {:8.4}  beta* {:.6}  R {:.6}  unimodal {}",
                c.ev_offset,
                c.x_g,
                c.d_tg,
                c.beta_opt,
                c.rate_opt,
                c.is_unimodal()
            );
        }
        return Ok(s);
    }

    let results: Vec<PointResult> = configs.into_par_iter().map(run_point).collect::<Result<_>>()?;
    write_results(preset, &results, out, opts)?;
    let mut s = report(preset, &results);
    if opts.timing {
        let _ = writeln!(s, "total {:.3} s", started.elapsed().as_secs_f64());
    }
    Ok(s)
}
