//! Executable forms of the metatheory, run against a single program.

use serde::Serialize;

use crate::circuit::{identity, LabelContext};
use crate::correspondence::{
    differential_run_with, from_machine, from_small_step, load, DifferentialReport, OutcomeClass, SmallConfig, Verdict,
};
use crate::harness::Program;
use crate::machine::{machine_rule_scan, measure_l, run_machine_fuel, MachineRule, StepKind};
use crate::mutant::{EvalOptions, Fuel};
use crate::smallstep::{run_small_fuel, small_rule_scan};
use crate::stacked::{run_stacked_fuel, stacked_rule_scan, stacked_step, StackedConfig};
use crate::typecheck::welltyped_config;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Property {
    Agreement,
    SubjectReduction,
    Progress,
    Determinism,
    Measure,
    Replay,
    Composition,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Agreement,
        Property::SubjectReduction,
        Property::Progress,
        Property::Determinism,
        Property::Measure,
        Property::Replay,
        Property::Composition,
    ];

    /// Acceptance criterion number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: Property,
    pub detail: String,
}

fn violation(property: Property, detail: impl Into<String>) -> Violation {
    Violation { property, detail: detail.into() }
}

pub fn initial_config(p: &Program) -> SmallConfig {
    SmallConfig { circuit: identity(&p.labels), term: p.term.clone() }
}

/// Criteria 1 and 3 from one differential run.
pub fn check_agreement(p: &Program, fuel: u64, opts: &EvalOptions) -> (DifferentialReport, Vec<Violation>) {
    let report = differential_run_with(&initial_config(p), fuel, opts);
    let mut out = Vec::new();
    if matches!(report.verdict, Verdict::Disagree(_)) {
        let classes: Vec<String> = report.outcomes().iter().map(|(n, o)| format!("{n}={}", o.summary())).collect();
        out.push(violation(Property::Agreement, classes.join("; ")));
    }
    for (name, o) in report.outcomes() {
        if o.class() == OutcomeClass::Deadlocked {
            out.push(violation(Property::Progress, format!("{name}: {}", o.summary())));
        }
    }
    (report, out)
}

/// The small-step trace as a list of configurations, initial state first.
pub fn small_trace(p: &Program, fuel: u64, opts: &EvalOptions) -> Vec<SmallConfig> {
    let mut states = vec![initial_config(p)];
    run_small_fuel(&initial_config(p), &mut Fuel::new(fuel), opts, &mut |ev| states.push(ev.after.clone()));
    states
}

pub fn check_subject_reduction(p: &Program, trace: &[SmallConfig]) -> Result<(), Violation> {
    let empty = LabelContext::new();
    for (i, cfg) in trace.iter().enumerate() {
        if let Err(e) = welltyped_config(&p.labels, &cfg.circuit, &cfg.term, &p.ty, &empty) {
            return Err(violation(Property::SubjectReduction, format!("step {i}: {e} at {}", cfg.term)));
        }
    }
    Ok(())
}

pub fn check_determinism(p: &Program, fuel: u64, opts: &EvalOptions) -> Result<(), Violation> {
    let bad = |what: &str, n: usize, state: String| {
        Err(violation(Property::Determinism, format!("{what}: {n} rules apply at {state}")))
    };
    for cfg in small_trace(p, fuel, opts) {
        let (rules, worst) = small_rule_scan(&cfg.circuit, &cfg.term, fuel, opts);
        let expected = usize::from(!cfg.term.is_value());
        if rules.len() != expected || worst > 1 {
            return bad("small", rules.len().max(worst), cfg.term.to_string());
        }
    }
    let mut stacked_states = vec![from_small_step(&initial_config(p))];
    run_stacked_fuel(&stacked_states[0].clone(), &mut Fuel::new(fuel), opts, &mut |_, _, after| {
        stacked_states.push(after.clone())
    });
    for x in &stacked_states {
        let rules = stacked_rule_scan(x, fuel, opts);
        if rules.len() != usize::from(!x.is_final()) {
            return bad("stacked", rules.len(), x.to_string());
        }
    }
    let mut machine_states = vec![load(&initial_config(p))];
    run_machine_fuel(&machine_states[0].clone(), &mut Fuel::new(fuel), opts, &mut |_, _, after| {
        machine_states.push(after.clone())
    });
    for mc in &machine_states {
        let rules = machine_rule_scan(mc);
        if rules.len() != usize::from(!mc.is_final()) {
            return bad("machine", rules.len(), mc.to_string());
        }
    }
    Ok(())
}

/// Criteria 5 and 6 (machine half) from one machine run.
pub fn check_machine_trace(p: &Program, fuel: u64, opts: &EvalOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    let start = load(&initial_config(p));
    let mut run_start_l = measure_l(&start);
    let mut run_len = 0u64;
    run_machine_fuel(&start, &mut Fuel::new(fuel), opts, &mut |before, rule: MachineRule, after| {
        if !out.is_empty() {
            return;
        }
        let (lb, la) = (measure_l(before), measure_l(after));
        let img_before = from_machine(before);
        let img_after = from_machine(after);
        match rule.kind() {
            StepKind::Bookkeeping => {
                run_len += 1;
                if la >= lb {
                    out.push(violation(Property::Measure, format!("{}: L {lb} -> {la} at {before}", rule.name())));
                }
                if run_len > run_start_l {
                    out.push(violation(
                        Property::Measure,
                        format!("bookkeeping run of {run_len} steps from L = {run_start_l}"),
                    ));
                }
                if img_before != img_after {
                    out.push(violation(
                        Property::Replay,
                        format!("{} does not stutter: {img_before} vs {img_after}", rule.name()),
                    ));
                }
            }
            StepKind::Real => {
                run_len = 0;
                run_start_l = la;
                match stacked_step(&img_before, opts) {
                    Ok((next, _)) if next == img_after => {}
                    Ok((next, r)) => out.push(violation(
                        Property::Replay,
                        format!("{} maps to {} ending at {next}, machine gives {img_after}", rule.name(), r.name()),
                    )),
                    Err(e) => out.push(violation(Property::Replay, format!("{}: image is stuck: {}", rule.name(), e.0))),
                }
            }
        }
    });
    out
}

/// Criterion 6 (small half): consecutive images are joined by ⇀+.
pub fn check_small_replay(trace: &[SmallConfig], fuel: u64, opts: &EvalOptions) -> Result<(), Violation> {
    for w in trace.windows(2) {
        let target = from_small_step(&w[1]);
        let mut x: StackedConfig = from_small_step(&w[0]);
        let mut steps = 0u64;
        loop {
            match stacked_step(&x, opts) {
                Ok((next, _)) => x = next,
                Err(e) => {
                    return Err(violation(Property::Replay, format!("⇀ stuck before reaching {}: {}", w[1].term, e.0)))
                }
            }
            steps += 1;
            if x == target {
                break;
            }
            if x.depth() == 1 || steps >= fuel {
                return Err(violation(
                    Property::Replay,
                    format!("{} does not reach {} by ⇀+ (reached {x})", w[0].term, w[1].term),
                ));
            }
        }
    }
    Ok(())
}

pub fn check_composition(trace: &[SmallConfig]) -> Result<(), Violation> {
    for cfg in trace {
        let a = from_machine(&load(cfg));
        let b = from_small_step(cfg);
        if a != b {
            return Err(violation(Property::Composition, format!("{a} vs {b}")));
        }
    }
    Ok(())
}

/// Runs every selected check; the differential report is returned alongside.
pub fn check_program(
    p: &Program,
    fuel: u64,
    opts: &EvalOptions,
    properties: &[Property],
) -> (DifferentialReport, Vec<Violation>) {
    let wants = |q: Property| properties.contains(&q);
    let (report, mut out) = check_agreement(p, fuel, opts);
    out.retain(|v| wants(v.property));
    let trace = if wants(Property::SubjectReduction) || wants(Property::Replay) || wants(Property::Composition) {
        small_trace(p, fuel, opts)
    } else {
        Vec::new()
    };
    if wants(Property::SubjectReduction) {
        out.extend(check_subject_reduction(p, &trace).err());
    }
    if wants(Property::Determinism) {
        out.extend(check_determinism(p, fuel, opts).err());
    }
    if wants(Property::Measure) || wants(Property::Replay) {
        out.extend(check_machine_trace(p, fuel, opts).into_iter().filter(|v| wants(v.property)));
    }
    if wants(Property::Replay) {
        out.extend(check_small_replay(&trace, fuel, opts).err());
    }
    if wants(Property::Composition) {
        out.extend(check_composition(&trace).err());
    }
    (report, out)
}
