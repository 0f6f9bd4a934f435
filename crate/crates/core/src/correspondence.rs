//! Translations between the run-state families and the four-way differential run.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::bigstep::run_big;
use crate::circuit::{boxed_equiv, equiv, LabelledCircuit};
use crate::machine::{run_machine_with, MachineConfig, StackElem};
use crate::mutant::EvalOptions;
use crate::smallstep::run_small_with;
use crate::stacked::{run_stacked_with, StackFrame, StackedConfig};
use crate::syntax::{alpha_eq_by, LabelId, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmallConfig {
    pub circuit: LabelledCircuit,
    pub term: Term,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OutcomeClass {
    Converged,
    Deadlocked,
    FuelExhausted,
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Converged { circuit: LabelledCircuit, value: Term, steps: u64 },
    Deadlocked { state: String, reason: String, steps: u64 },
    FuelExhausted { state: String, steps: u64 },
}

impl RunOutcome {
    pub fn class(&self) -> OutcomeClass {
        match self {
            RunOutcome::Converged { .. } => OutcomeClass::Converged,
            RunOutcome::Deadlocked { .. } => OutcomeClass::Deadlocked,
            RunOutcome::FuelExhausted { .. } => OutcomeClass::FuelExhausted,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RunOutcome::Converged { steps, .. }
            | RunOutcome::Deadlocked { steps, .. }
            | RunOutcome::FuelExhausted { steps, .. } => *steps,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            RunOutcome::Converged { value, circuit, steps } => {
                format!("Converged after {steps} steps: {value} over {} gates", circuit.gate_count())
            }
            RunOutcome::Deadlocked { reason, steps, .. } => format!("Deadlocked after {steps} steps: {reason}"),
            RunOutcome::FuelExhausted { steps, .. } => format!("FuelExhausted after {steps} steps"),
        }
    }
}

pub fn from_small_step(cfg: &SmallConfig) -> StackedConfig {
    StackedConfig::single(cfg.circuit.clone(), cfg.term.clone())
}

pub fn to_small_step(x: &StackedConfig) -> Option<SmallConfig> {
    match x.frames.as_slice() {
        [f] if f.locals.is_none() => Some(SmallConfig { circuit: f.circuit.clone(), term: f.term.clone() }),
        _ => None,
    }
}

pub fn load(cfg: &SmallConfig) -> MachineConfig {
    MachineConfig { circuit: cfg.circuit.clone(), term: cfg.term.clone(), stack: Vec::new() }
}

/// Unwinds the machine stack into a stacked configuration.
pub fn from_machine(mc: &MachineConfig) -> StackedConfig {
    let mut frames = Vec::new();
    let mut circuit = mc.circuit.clone();
    let mut term = mc.term.clone();
    for e in mc.stack.iter().rev() {
        term = match e {
            StackElem::FArg(n) => Term::app(term, n.clone()),
            StackElem::FApp(v) => Term::app(v.clone(), term),
            StackElem::ALabel(n) => Term::apply(term, n.clone()),
            StackElem::ACirc(v) => Term::apply(v.clone(), term),
            StackElem::TRight(n) => Term::pair(term, n.clone()),
            StackElem::TLeft(v) => Term::pair(v.clone(), term),
            StackElem::BoxK { ty, .. } => Term::box_t(ty.clone(), term),
            StackElem::LetK(x, y, n) => Term::let_pair(x.clone(), y.clone(), term, n.clone()),
            StackElem::ForceK => Term::force(term),
            StackElem::SubK { circuit: outer, term: body, labels, ty } => {
                let inner = std::mem::replace(&mut circuit, outer.clone());
                frames.push(StackFrame { circuit: inner, term, locals: Some(labels.clone()) });
                Term::box_t(ty.clone(), Term::lift(body.clone()))
            }
        };
    }
    frames.push(StackFrame { circuit, term, locals: None });
    StackedConfig { frames }
}

/// Values agree when alpha-equal with labels identified through each final
/// circuit's canonical numbering and boxed literals compared by `boxed_equiv`.
pub fn values_match(c1: &LabelledCircuit, v1: &Term, c2: &LabelledCircuit, v2: &Term) -> bool {
    let n1 = c1.canonical_form(&[]).1;
    let n2 = c2.canonical_form(&[]).1;
    let canon = |n: &BTreeMap<LabelId, u32>, l: LabelId| n.get(&l).copied().ok_or(l);
    alpha_eq_by(
        v1,
        v2,
        &mut |a, b| canon(&n1, a) == canon(&n2, b),
        &mut |a, b| match (a, b) {
            (Term::BoxedCirc(i1, d1, o1), Term::BoxedCirc(i2, d2, o2)) => boxed_equiv((i1, d1, o1), (i2, d2, o2)),
            _ => false,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail")]
pub enum Verdict {
    Agree,
    /// Outcome classes differ only by fuel exhaustion.
    Inconclusive(String),
    Disagree(String),
}

#[derive(Clone, Debug)]
pub struct DifferentialReport {
    pub big: RunOutcome,
    pub small: RunOutcome,
    pub stacked: RunOutcome,
    pub machine: RunOutcome,
    pub verdict: Verdict,
}

impl DifferentialReport {
    pub fn outcomes(&self) -> [(&'static str, &RunOutcome); 4] {
        [("big", &self.big), ("small", &self.small), ("stacked", &self.stacked), ("machine", &self.machine)]
    }

    pub fn classes(&self) -> [OutcomeClass; 4] {
        self.outcomes().map(|(_, o)| o.class())
    }
}

pub fn differential_run(cfg: &SmallConfig, fuel: u64) -> DifferentialReport {
    differential_run_with(cfg, fuel, &EvalOptions::default())
}

pub fn differential_run_with(cfg: &SmallConfig, fuel: u64, opts: &EvalOptions) -> DifferentialReport {
    let big = run_big(cfg, fuel, opts);
    let small = run_small_with(cfg, fuel, opts);
    let stacked = run_stacked_with(&from_small_step(cfg), fuel, opts);
    let machine = run_machine_with(&load(cfg), fuel, opts);
    let mut report = DifferentialReport { big, small, stacked, machine, verdict: Verdict::Agree };
    report.verdict = judge(&report);
    report
}

fn judge(r: &DifferentialReport) -> Verdict {
    let classes = r.classes();
    if classes.iter().any(|c| *c != classes[0]) {
        let listing = r.outcomes().map(|(n, o)| format!("{n}={}", o.class())).join(", ");
        if classes.contains(&OutcomeClass::FuelExhausted) {
            return Verdict::Inconclusive(listing);
        }
        return Verdict::Disagree(format!("outcome classes differ: {listing}"));
    }
    let RunOutcome::Converged { circuit: sc, value: sv, .. } = &r.small else {
        return Verdict::Agree;
    };
    if let RunOutcome::Converged { circuit, value, .. } = &r.big {
        if circuit != sc || value != sv {
            return Verdict::Disagree(format!(
                "big and small differ: big gives {value} over {circuit}, small gives {sv} over {sc}"
            ));
        }
    }
    for (name, o) in [("stacked", &r.stacked), ("machine", &r.machine)] {
        let RunOutcome::Converged { circuit, value, .. } = o else { unreachable!() };
        if !equiv(circuit, sc) {
            return Verdict::Disagree(format!("{name} circuit {circuit} is not equivalent to small-step circuit {sc}"));
        }
        if !values_match(circuit, value, sc, sv) {
            return Verdict::Disagree(format!("{name} value {value} does not match small-step value {sv}"));
        }
    }
    Verdict::Agree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{identity, LabelContext};
    use crate::syntax::{parse, LabelTuple};
    use crate::types::{TypeExpr, WireType};

    fn cfg(src: &str, ls: &[u32]) -> SmallConfig {
        let q: LabelContext = ls.iter().map(|n| (LabelId(*n), WireType::qubit())).collect();
        SmallConfig { circuit: identity(&q), term: parse(src).unwrap() }
    }

    #[test]
    fn small_step_embedding_is_invertible() {
        let c = cfg("(\\x:Qubit. x) #0", &[0]);
        let x = from_small_step(&c);
        assert_eq!(x.frames.len(), 1);
        assert_eq!(to_small_step(&x), Some(c.clone()));
        assert_eq!(from_machine(&load(&c)), x);
    }

    #[test]
    fn split_and_shifted_frames_agree() {
        let v = parse("\\x:Qubit. x").unwrap();
        let w = Term::Lab(LabelId(0));
        let c = identity(&LabelContext::new());
        let a = MachineConfig { circuit: c.clone(), term: v.clone(), stack: vec![StackElem::FArg(w.clone())] };
        let b = MachineConfig { circuit: c.clone(), term: w.clone(), stack: vec![StackElem::FApp(v.clone())] };
        assert_eq!(from_machine(&a), from_machine(&b));
        assert_eq!(from_machine(&a), StackedConfig::single(c, Term::app(v, w)));
    }

    #[test]
    fn sub_frame_becomes_stack_frame() {
        let outer = identity(&LabelContext::new());
        let q: LabelContext = [(LabelId(4), WireType::qubit())].into_iter().collect();
        let inner = identity(&q);
        let n = parse("\\x:Qubit. x").unwrap();
        let mc = MachineConfig {
            circuit: inner.clone(),
            term: Term::Lab(LabelId(5)),
            stack: vec![StackElem::SubK {
                circuit: outer.clone(),
                term: n.clone(),
                labels: LabelTuple::Leaf(LabelId(4)),
                ty: TypeExpr::qubit(),
            }],
        };
        let x = from_machine(&mc);
        assert_eq!(x.frames.len(), 2);
        assert_eq!(x.frames[0].locals, Some(LabelTuple::Leaf(LabelId(4))));
        assert_eq!(x.frames[0].circuit, inner);
        assert_eq!(x.frames[1].term, Term::box_t(TypeExpr::qubit(), Term::lift(n)));
        assert_eq!(x.frames[1].circuit, outer);
    }

    #[test]
    fn identity_program_agrees() {
        let r = differential_run(&cfg("(\\x:Qubit. x) #0", &[0]), 100);
        assert_eq!(r.verdict, Verdict::Agree);
        assert!(r.classes().iter().all(|c| *c == OutcomeClass::Converged));
    }

    #[test]
    fn ill_typed_stuck_term_deadlocks_everywhere() {
        let r = differential_run(&cfg("<#0, force #1>", &[0, 1]), 100);
        assert_eq!(r.classes(), [OutcomeClass::Deadlocked; 4]);
        assert_eq!(r.verdict, Verdict::Agree);
    }

    #[test]
    fn value_matching_respects_renaming() {
        let c1 = identity(&[(LabelId(0), WireType::qubit()), (LabelId(1), WireType::qubit())].into_iter().collect());
        let c2 = identity(&[(LabelId(5), WireType::qubit()), (LabelId(7), WireType::qubit())].into_iter().collect());
        let v1 = parse("<#0, #1>").unwrap();
        assert!(values_match(&c1, &v1, &c2, &parse("<#5, #7>").unwrap()));
        assert!(!values_match(&c1, &v1, &c1, &parse("<#1, #0>").unwrap()));
    }
}
