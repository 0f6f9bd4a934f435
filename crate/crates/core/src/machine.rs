//! The ⇒ relation: a CEK-style machine over a continuation stack.

use std::fmt;

use crate::circuit::{append, freshlabels, identity, LabelContext, LabelledCircuit};
use crate::correspondence::RunOutcome;
use crate::mutant::{EvalOptions, Fuel, Mutant};
use crate::syntax::{substitute, LabelTuple, Term};
use crate::types::TypeExpr;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StackElem {
    FArg(Term),
    FApp(Term),
    ALabel(Term),
    ACirc(Term),
    TRight(Term),
    TLeft(Term),
    BoxK { q: LabelContext, labels: LabelTuple, ty: TypeExpr },
    SubK { circuit: LabelledCircuit, term: Term, labels: LabelTuple, ty: TypeExpr },
    LetK(String, String, Term),
    ForceK,
}

impl StackElem {
    fn tag(&self) -> &'static str {
        match self {
            StackElem::FArg(_) => "FArg",
            StackElem::FApp(_) => "FApp",
            StackElem::ALabel(_) => "ALabel",
            StackElem::ACirc(_) => "ACirc",
            StackElem::TRight(_) => "TRight",
            StackElem::TLeft(_) => "TLeft",
            StackElem::BoxK { .. } => "Box",
            StackElem::SubK { .. } => "Sub",
            StackElem::LetK(..) => "Let",
            StackElem::ForceK => "Force",
        }
    }
}

/// `(C, M, S)`; the top of the stack is the last element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineConfig {
    pub circuit: LabelledCircuit,
    pub term: Term,
    pub stack: Vec<StackElem>,
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} gates, {}, ", self.circuit.gate_count(), self.term)?;
        for e in self.stack.iter().rev() {
            write!(f, "{}.", e.tag())?;
        }
        f.write_str("ε)")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MachineRule {
    AppSplit,
    AppShift,
    AppJoin,
    ApplySplit,
    ApplyShift,
    ApplyJoin,
    TupleSplit,
    TupleShift,
    TupleJoin,
    BoxOpen,
    BoxSub,
    BoxClose,
    LetSplit,
    LetJoin,
    ForceOpen,
    ForceClose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Bookkeeping,
    Real,
}

impl MachineRule {
    pub const ALL: [MachineRule; 16] = [
        MachineRule::AppSplit,
        MachineRule::AppShift,
        MachineRule::AppJoin,
        MachineRule::ApplySplit,
        MachineRule::ApplyShift,
        MachineRule::ApplyJoin,
        MachineRule::TupleSplit,
        MachineRule::TupleShift,
        MachineRule::TupleJoin,
        MachineRule::BoxOpen,
        MachineRule::BoxSub,
        MachineRule::BoxClose,
        MachineRule::LetSplit,
        MachineRule::LetJoin,
        MachineRule::ForceOpen,
        MachineRule::ForceClose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MachineRule::AppSplit => "app-split",
            MachineRule::AppShift => "app-shift",
            MachineRule::AppJoin => "app-join",
            MachineRule::ApplySplit => "apply-split",
            MachineRule::ApplyShift => "apply-shift",
            MachineRule::ApplyJoin => "apply-join",
            MachineRule::TupleSplit => "tuple-split",
            MachineRule::TupleShift => "tuple-shift",
            MachineRule::TupleJoin => "tuple-join",
            MachineRule::BoxOpen => "box-open",
            MachineRule::BoxSub => "box-sub",
            MachineRule::BoxClose => "box-close",
            MachineRule::LetSplit => "let-split",
            MachineRule::LetJoin => "let-join",
            MachineRule::ForceOpen => "force-open",
            MachineRule::ForceClose => "force-close",
        }
    }

    pub fn kind(self) -> StepKind {
        match self {
            MachineRule::AppJoin
            | MachineRule::ApplyJoin
            | MachineRule::BoxSub
            | MachineRule::BoxClose
            | MachineRule::LetJoin
            | MachineRule::ForceClose => StepKind::Real,
            _ => StepKind::Bookkeeping,
        }
    }
}

impl fmt::Display for MachineRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn step_kind(_before: &MachineConfig, _after: &MachineConfig, rule: MachineRule) -> StepKind {
    rule.kind()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StuckMachine(pub String);

pub fn load_term(circuit: LabelledCircuit, term: Term) -> MachineConfig {
    MachineConfig { circuit, term, stack: Vec::new() }
}

impl MachineConfig {
    pub fn is_final(&self) -> bool {
        self.stack.is_empty() && self.term.is_value()
    }
}

pub fn machine_step(mc: &MachineConfig, opts: &EvalOptions) -> Result<(MachineConfig, MachineRule), StuckMachine> {
    let mut next = mc.clone();
    let rule = step_in_place(&mut next, opts)?;
    Ok((next, rule))
}

fn stuck<T>(msg: String) -> Result<T, StuckMachine> {
    Err(StuckMachine(msg))
}

fn step_in_place(mc: &mut MachineConfig, opts: &EvalOptions) -> Result<MachineRule, StuckMachine> {
    use MachineRule as R;
    if !mc.term.is_value() {
        let term = std::mem::replace(&mut mc.term, Term::Lab(crate::syntax::LabelId(0)));
        let (t, elem, rule) = match term {
            Term::App(m, n) => (*m, StackElem::FArg(*n), R::AppSplit),
            Term::ApplyC(m, n) => (*m, StackElem::ALabel(*n), R::ApplySplit),
            Term::Pair(m, n) => (*m, StackElem::TRight(*n), R::TupleSplit),
            Term::LetPair(x, y, m, n) => (*m, StackElem::LetK(x, y, *n), R::LetSplit),
            Term::Force(m) => (*m, StackElem::ForceK, R::ForceOpen),
            Term::BoxT(ty, m) => match freshlabels(&m, &ty) {
                Ok((q, labels)) => (*m, StackElem::BoxK { q, labels, ty }, R::BoxOpen),
                Err(e) => {
                    mc.term = Term::BoxT(ty, m);
                    return stuck(e.to_string());
                }
            },
            other => {
                let msg = format!("no rule for non-value {other}");
                mc.term = other;
                return stuck(msg);
            }
        };
        mc.term = t;
        mc.stack.push(elem);
        return Ok(rule);
    }
    let Some(top) = mc.stack.pop() else {
        return stuck("final configuration".to_string());
    };
    let v = std::mem::replace(&mut mc.term, Term::Lab(crate::syntax::LabelId(0)));
    let restore = |mc: &mut MachineConfig, top: StackElem, v: Term, why: &str| {
        let msg = format!("{} on top of the stack with value {v}: {why}", top.tag());
        mc.term = v;
        mc.stack.push(top);
        stuck(msg)
    };
    match top {
        StackElem::FArg(n) => {
            mc.term = n;
            mc.stack.push(StackElem::FApp(v));
            Ok(R::AppShift)
        }
        StackElem::FApp(f) => match f {
            Term::Abs(x, _, body) => {
                mc.term = substitute(&body, &v, &x);
                Ok(R::AppJoin)
            }
            f => restore(mc, StackElem::FApp(f), v, "not a function"),
        },
        StackElem::ALabel(n) => {
            mc.term = n;
            mc.stack.push(StackElem::ACirc(v));
            Ok(R::ApplyShift)
        }
        StackElem::ACirc(circ) => {
            let (Term::BoxedCirc(ins, d, outs), Some(k)) = (&circ, LabelTuple::from_term(&v)) else {
                return restore(mc, StackElem::ACirc(circ), v, "apply needs a boxed circuit and labels");
            };
            match append(&mc.circuit, &k, ins, d, outs) {
                Ok((c2, k2)) => {
                    mc.circuit = c2;
                    mc.term = k2.to_term();
                    Ok(R::ApplyJoin)
                }
                Err(e) => {
                    let why = e.to_string();
                    restore(mc, StackElem::ACirc(circ), v, &why)
                }
            }
        }
        StackElem::TRight(n) => {
            mc.term = n;
            mc.stack.push(StackElem::TLeft(v));
            Ok(R::TupleShift)
        }
        StackElem::TLeft(w) => {
            mc.term = if opts.is(Mutant::MachineTupleJoinSwap) { Term::pair(v, w) } else { Term::pair(w, v) };
            Ok(R::TupleJoin)
        }
        StackElem::BoxK { q, labels, ty } => match v {
            Term::Lift(m) => {
                let outer = std::mem::replace(&mut mc.circuit, identity(&q));
                mc.term = Term::app((*m).clone(), labels.to_term());
                mc.stack.push(StackElem::SubK { circuit: outer, term: *m, labels, ty });
                Ok(R::BoxSub)
            }
            v => restore(mc, StackElem::BoxK { q, labels, ty }, v, "box needs a lifted value"),
        },
        StackElem::SubK { circuit, term, labels, ty } => match LabelTuple::from_term(&v) {
            Some(outs) => {
                let d = std::mem::replace(&mut mc.circuit, circuit);
                if opts.is(Mutant::MachineBoxCloseKeepsInner) {
                    mc.circuit = d.clone();
                }
                mc.term = Term::boxed(labels, d, outs);
                Ok(R::BoxClose)
            }
            None => restore(mc, StackElem::SubK { circuit, term, labels, ty }, v, "boxed body returned non-labels"),
        },
        StackElem::LetK(x, y, n) => match v {
            Term::Pair(v1, v2) => {
                let (a, b) = if opts.is(Mutant::MachineLetJoinSwap) { (v2, v1) } else { (v1, v2) };
                mc.term = substitute(&substitute(&n, &a, &x), &b, &y);
                Ok(R::LetJoin)
            }
            v => restore(mc, StackElem::LetK(x, y, n), v, "let needs a pair"),
        },
        StackElem::ForceK => match v {
            Term::Lift(m) => {
                mc.term = *m;
                Ok(R::ForceClose)
            }
            v => restore(mc, StackElem::ForceK, v, "force needs a lifted value"),
        },
    }
}

pub fn term_measure(m: &Term) -> u64 {
    if m.is_value() {
        return 0;
    }
    match m {
        Term::BoxT(_, b) | Term::Force(b) | Term::LetPair(_, _, b, _) => term_measure(b) + 1,
        Term::App(a, b) | Term::ApplyC(a, b) => term_measure(a) + term_measure(b) + 2,
        Term::Pair(a, b) => term_measure(a) + term_measure(b) + 3,
        _ => 0,
    }
}

pub fn stack_measure(stack: &[StackElem]) -> u64 {
    let mut total = 0;
    for e in stack.iter().rev() {
        match e {
            StackElem::SubK { .. } => return total,
            StackElem::BoxK { .. } | StackElem::ForceK | StackElem::LetK(..) => {}
            StackElem::FArg(m) | StackElem::ALabel(m) => total += term_measure(m) + 1,
            StackElem::TRight(m) => total += term_measure(m) + 2,
            StackElem::FApp(_) | StackElem::ACirc(_) => {}
            StackElem::TLeft(_) => total += 1,
        }
    }
    total
}

/// The termination measure `L` for bookkeeping steps.
pub fn measure_l(mc: &MachineConfig) -> u64 {
    term_measure(&mc.term) + stack_measure(&mc.stack)
}

pub fn run_machine_fuel(
    mc: &MachineConfig,
    fuel: &mut Fuel,
    opts: &EvalOptions,
    observe: &mut dyn FnMut(&MachineConfig, MachineRule, &MachineConfig),
) -> RunOutcome {
    let start = fuel.used;
    let mut cur = mc.clone();
    let mut prev = cur.clone();
    // bookkeeping steps are free but cannot outnumber L at the start of the run
    let mut bookkeeping_budget = measure_l(&cur);
    loop {
        if cur.is_final() {
            return RunOutcome::Converged { circuit: cur.circuit, value: cur.term, steps: fuel.used - start };
        }
        prev.clone_from(&cur);
        let rule = match step_in_place(&mut cur, opts) {
            Ok(rule) => rule,
            Err(StuckMachine(reason)) => {
                return RunOutcome::Deadlocked { state: cur.to_string(), reason, steps: fuel.used - start }
            }
        };
        match rule.kind() {
            StepKind::Real => {
                if !fuel.tick() {
                    return RunOutcome::FuelExhausted { state: prev.to_string(), steps: fuel.used - start };
                }
                bookkeeping_budget = measure_l(&cur);
            }
            StepKind::Bookkeeping => {
                if bookkeeping_budget == 0 {
                    return RunOutcome::FuelExhausted {
                        state: format!("{prev} (bookkeeping run exceeded its measure)"),
                        steps: fuel.used - start,
                    };
                }
                bookkeeping_budget -= 1;
            }
        }
        observe(&prev, rule, &cur);
    }
}

pub fn run_machine_with(mc: &MachineConfig, fuel: u64, opts: &EvalOptions) -> RunOutcome {
    run_machine_fuel(mc, &mut Fuel::new(fuel), opts, &mut |_, _, _| {})
}

pub fn run_machine(mc: &MachineConfig, fuel: u64) -> RunOutcome {
    run_machine_with(mc, fuel, &EvalOptions::default())
}

/// Every machine rule whose left-hand side matches, checked rule by rule.
pub fn machine_rule_scan(mc: &MachineConfig) -> Vec<MachineRule> {
    use MachineRule as R;
    let value = mc.term.is_value();
    let top = mc.stack.last();
    let label_value = LabelTuple::from_term(&mc.term);
    MachineRule::ALL
        .into_iter()
        .filter(|rule| match rule {
            R::AppSplit => matches!(mc.term, Term::App(..)),
            R::ApplySplit => matches!(mc.term, Term::ApplyC(..)),
            R::TupleSplit => matches!(mc.term, Term::Pair(..)) && !value,
            R::LetSplit => matches!(mc.term, Term::LetPair(..)),
            R::ForceOpen => matches!(mc.term, Term::Force(_)),
            R::BoxOpen => matches!(&mc.term, Term::BoxT(t, _) if t.is_simple_m_type()),
            R::AppShift => value && matches!(top, Some(StackElem::FArg(_))),
            R::AppJoin => matches!(top, Some(StackElem::FApp(Term::Abs(..)))) && value,
            R::ApplyShift => value && matches!(top, Some(StackElem::ALabel(_))),
            R::ApplyJoin => match (top, &label_value) {
                (Some(StackElem::ACirc(Term::BoxedCirc(ins, d, outs))), Some(k)) => {
                    append(&mc.circuit, k, ins, d, outs).is_ok()
                }
                _ => false,
            },
            R::TupleShift => value && matches!(top, Some(StackElem::TRight(_))),
            R::TupleJoin => value && matches!(top, Some(StackElem::TLeft(_))),
            R::BoxSub => matches!(top, Some(StackElem::BoxK { .. })) && matches!(mc.term, Term::Lift(_)),
            R::BoxClose => matches!(top, Some(StackElem::SubK { .. })) && label_value.is_some(),
            R::LetJoin => {
                matches!(top, Some(StackElem::LetK(..))) && matches!(mc.term, Term::Pair(..)) && value
            }
            R::ForceClose => matches!(top, Some(StackElem::ForceK)) && matches!(mc.term, Term::Lift(_)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, LabelId};
    use crate::types::WireType;

    fn load(src: &str, ls: &[u32]) -> MachineConfig {
        let q: LabelContext = ls.iter().map(|n| (LabelId(*n), WireType::qubit())).collect();
        load_term(identity(&q), parse(src).unwrap())
    }

    fn step(mc: &MachineConfig) -> (MachineConfig, MachineRule) {
        machine_step(mc, &EvalOptions::default()).unwrap()
    }

    #[test]
    fn identity_application_takes_three_steps() {
        let mc = load("(\\x:Qubit. x) #0", &[0]);
        let (m1, r1) = step(&mc);
        let (m2, r2) = step(&m1);
        let (m3, r3) = step(&m2);
        assert_eq!((r1, r2, r3), (MachineRule::AppSplit, MachineRule::AppShift, MachineRule::AppJoin));
        assert!(m3.is_final());
        assert_eq!(m3.term, Term::Lab(LabelId(0)));
        let mut seen = 0;
        let out = run_machine_fuel(&mc, &mut Fuel::new(10), &EvalOptions::default(), &mut |_, _, _| seen += 1);
        assert_eq!(seen, 3);
        assert!(matches!(out, RunOutcome::Converged { steps: 1, .. }));
    }

    #[test]
    fn box_sub_and_close() {
        let c = identity(&LabelContext::new());
        let q: LabelContext = [(LabelId(0), WireType::qubit())].into_iter().collect();
        let m = parse("\\x:Qubit. x").unwrap();
        let mc = MachineConfig {
            circuit: c.clone(),
            term: Term::lift(m.clone()),
            stack: vec![StackElem::BoxK { q: q.clone(), labels: LabelTuple::Leaf(LabelId(0)), ty: TypeExpr::qubit() }],
        };
        let (m1, r) = step(&mc);
        assert_eq!(r, MachineRule::BoxSub);
        assert_eq!(m1.circuit, identity(&q));
        assert_eq!(m1.term, Term::app(m.clone(), Term::Lab(LabelId(0))));
        let done = MachineConfig { circuit: identity(&q), term: Term::Lab(LabelId(0)), stack: m1.stack.clone() };
        let (m2, r) = step(&done);
        assert_eq!(r, MachineRule::BoxClose);
        assert_eq!(m2.circuit, c);
        assert!(matches!(m2.term, Term::BoxedCirc(..)));
        assert!(m2.stack.is_empty());
    }

    #[test]
    fn force_close_needs_lift() {
        let mc = MachineConfig { term: Term::Lab(LabelId(0)), stack: vec![StackElem::ForceK], ..load("#0", &[0]) };
        assert!(machine_step(&mc, &EvalOptions::default()).is_err());
        assert!(machine_rule_scan(&mc).is_empty());
    }

    #[test]
    fn kinds_and_measure() {
        assert_eq!(MachineRule::AppSplit.kind(), StepKind::Bookkeeping);
        assert_eq!(MachineRule::AppJoin.kind(), StepKind::Real);
        assert_eq!(MachineRule::TupleJoin.kind(), StepKind::Bookkeeping);
        assert_eq!(MachineRule::ALL.iter().filter(|r| r.kind() == StepKind::Real).count(), 6);
        assert_eq!(measure_l(&load("#0", &[0])), 0);
        let mc = load("(force lift #0) ((\\x:Qubit. x) #1)", &[0, 1]);
        assert_eq!(measure_l(&mc), 1 + 2 + 2);
    }

    #[test]
    fn hadamard_box() {
        let out = run_machine(&load("box[Qubit](lift \\x:Qubit. apply(gate H, x))", &[]), 100);
        let RunOutcome::Converged { circuit, value: Term::BoxedCirc(_, d, _), .. } = out else { panic!() };
        assert!(circuit.gates.is_empty());
        assert_eq!(d.gates[0].name, "H");
    }
}
