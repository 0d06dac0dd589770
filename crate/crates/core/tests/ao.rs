mod common;

use v2i_secrecy::oracle::{audit_constraints, reference_sum_secrecy};
use v2i_secrecy::rate::sum_secrecy;
use v2i_secrecy::{baseline_plan, run_ao, ScenarioConfig};

/// Sum secrecy rate of the reference baseline at 20 slots.
const BASELINE_20: f64 = 31.548_549_087_733_22;

#[test]
fn baseline_regression() {
    let cfg = ScenarioConfig::reference(20);
    let plan = baseline_plan(&cfg).unwrap();
    assert!((reference_sum_secrecy(&plan, &cfg) - BASELINE_20).abs() <= 1e-9);
    assert!((sum_secrecy(&plan, &cfg).unwrap() - BASELINE_20).abs() <= 1e-9);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let cfg = ScenarioConfig::reference(30);
    let (a, ta) = run_ao(&cfg).unwrap();
    let (b, tb) = run_ao(&cfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.positions), bits(&b.positions));
    assert_eq!(bits(&a.betas), bits(&b.betas));
    assert_eq!(bits(&a.power_cw), bits(&b.power_cw));
    assert_eq!(bits(&a.power_an), bits(&b.power_an));
    assert_eq!(bits(&ta.objectives), bits(&tb.objectives));
}

#[test]
fn stages_never_lose_ground() {
    let mut rng = common::rng(61);
    for _ in 0..8 {
        let cfg = common::random_config(&mut rng, 20);
        let (plan, trace) = run_ao(&cfg).unwrap();
        for (before, after) in trace.stage_steps() {
            assert!(after >= before - 1e-9, "{before} -> {after}");
        }
        assert!((sum_secrecy(&plan, &cfg).unwrap() - trace.final_objective()).abs() <= 1e-12);
        assert!(trace.iterations >= 1 && trace.iterations <= v2i_secrecy::ao::MAX_OUTER_ITERS);
        let violations = audit_constraints(&plan, &cfg, 1e-9);
        assert!(violations.is_empty(), "{violations:?}");
    }
}

#[test]
fn zero_budget_is_silent() {
    let mut cfg = ScenarioConfig::reference(10);
    cfg.power_budget = 0.0;
    let (plan, trace) = run_ao(&cfg).unwrap();
    assert_eq!(trace.final_objective(), 0.0);
    assert!(plan.power_cw.iter().chain(&plan.power_an).all(|&p| p == 0.0));
}

#[test]
fn optimized_beats_baseline_at_reference() {
    let cfg = ScenarioConfig::reference(20);
    let (_, trace) = run_ao(&cfg).unwrap();
    assert!(trace.final_objective() >= 1.1 * trace.baseline);
}
