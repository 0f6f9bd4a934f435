//! The ⇀ relation over stacks of configurations.

use std::fmt;

use crate::circuit::{freshlabels, identity, LabelledCircuit};
use crate::correspondence::RunOutcome;
use crate::mutant::{EvalOptions, Fuel, Mutant};
use crate::smallstep::{context_splits, decompose, is_box_lift, reduce_plain, small_rule_scan, SmallRule};
use crate::syntax::{LabelTuple, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StackFrame {
    pub circuit: LabelledCircuit,
    pub term: Term,
    /// `None` encodes the empty tuple `∅`.
    pub locals: Option<LabelTuple>,
}

/// `(C, M)^ℓ . X`, head first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StackedConfig {
    pub frames: Vec<StackFrame>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StackedRule {
    Head(SmallRule),
    StepIn,
    StepOut,
}

impl StackedRule {
    pub fn name(self) -> &'static str {
        match self {
            StackedRule::Head(_) => "head",
            StackedRule::StepIn => "step-in",
            StackedRule::StepOut => "step-out",
        }
    }
}

impl fmt::Display for StackedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackedRule::Head(r) => write!(f, "head({r})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StuckStacked(pub String);

impl StackedConfig {
    pub fn single(circuit: LabelledCircuit, term: Term) -> Self {
        StackedConfig { frames: vec![StackFrame { circuit, term, locals: None }] }
    }

    pub fn head(&self) -> &StackFrame {
        &self.frames[0]
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// Last frame has empty locals, every other frame nonempty locals.
    pub fn is_well_formed(&self) -> bool {
        match self.frames.split_last() {
            None => false,
            Some((last, init)) => last.locals.is_none() && init.iter().all(|f| f.locals.is_some()),
        }
    }

    /// Single frame holding a value with empty locals.
    pub fn is_final(&self) -> bool {
        self.frames.len() == 1 && self.frames[0].locals.is_none() && self.frames[0].term.is_value()
    }
}

impl fmt::Display for StackedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, fr) in self.frames.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            let locals = fr.locals.as_ref().map_or("∅".to_string(), |l| l.to_string());
            write!(f, "({} gates, {})^{}", fr.circuit.gate_count(), fr.term, locals)?;
        }
        Ok(())
    }
}

/// Necessary condition for reachability: every non-head frame waits on a box.
pub fn is_reachable_shape(x: &StackedConfig) -> bool {
    x.is_well_formed() && x.frames[1..].iter().all(|f| matches!(decompose(&f.term), Some((_, r)) if is_box_lift(&r)))
}

pub fn stacked_step(x: &StackedConfig, opts: &EvalOptions) -> Result<(StackedConfig, StackedRule), StuckStacked> {
    let head = x.head();
    if let Some((ctx, redex)) = decompose(&head.term) {
        if let Term::BoxT(t, lifted) = &redex {
            if let Term::Lift(n) = &**lifted {
                let (q, ins) = freshlabels(n, t).map_err(|e| StuckStacked(e.to_string()))?;
                let mut frames = Vec::with_capacity(x.frames.len() + 1);
                frames.push(StackFrame {
                    circuit: identity(&q),
                    term: Term::app((**n).clone(), ins.to_term()),
                    locals: Some(ins),
                });
                frames.extend(x.frames.iter().cloned());
                return Ok((StackedConfig { frames }, StackedRule::StepIn));
            }
        }
        return match reduce_plain(&head.circuit, &redex, opts) {
            Some(Ok((c, m, rule))) => {
                let mut frames = x.frames.clone();
                frames[0] = StackFrame { circuit: c, term: ctx.plug(m), locals: head.locals.clone() };
                Ok((StackedConfig { frames }, StackedRule::Head(rule)))
            }
            Some(Err(reason)) => Err(StuckStacked(format!("{reason} at {redex}"))),
            None => unreachable!("box redexes handled above"),
        };
    }
    let (Some(locals), Some(below)) = (&head.locals, x.frames.get(1)) else {
        return Err(StuckStacked("value at the bottom frame".to_string()));
    };
    let Some(outs) = LabelTuple::from_term(&head.term) else {
        return Err(StuckStacked(format!("boxed body returned a non-label value {}", head.term)));
    };
    let Some((ctx, redex)) = decompose(&below.term) else {
        return Err(StuckStacked("frame below the head is not waiting on a box".to_string()));
    };
    if !is_box_lift(&redex) {
        return Err(StuckStacked("frame below the head is not waiting on a box".to_string()));
    }
    let boxed = if opts.is(Mutant::StackedStepOutSwap) {
        Term::boxed(outs, head.circuit.clone(), locals.clone())
    } else {
        Term::boxed(locals.clone(), head.circuit.clone(), outs)
    };
    let mut frames: Vec<StackFrame> = x.frames[1..].to_vec();
    frames[0] = StackFrame { circuit: below.circuit.clone(), term: ctx.plug(boxed), locals: below.locals.clone() };
    Ok((StackedConfig { frames }, StackedRule::StepOut))
}

pub fn run_stacked_fuel(
    x: &StackedConfig,
    fuel: &mut Fuel,
    opts: &EvalOptions,
    observe: &mut dyn FnMut(&StackedConfig, StackedRule, &StackedConfig),
) -> RunOutcome {
    let start = fuel.used;
    let mut cur = x.clone();
    loop {
        if cur.is_final() {
            let f = cur.frames.pop().expect("one frame");
            return RunOutcome::Converged { circuit: f.circuit, value: f.term, steps: fuel.used - start };
        }
        if !fuel.tick() {
            return RunOutcome::FuelExhausted { state: cur.to_string(), steps: fuel.used - start };
        }
        match stacked_step(&cur, opts) {
            Ok((next, rule)) => {
                observe(&cur, rule, &next);
                cur = next;
            }
            Err(StuckStacked(reason)) => {
                return RunOutcome::Deadlocked { state: cur.to_string(), reason, steps: fuel.used - start }
            }
        }
    }
}

pub fn run_stacked_with(x: &StackedConfig, fuel: u64, opts: &EvalOptions) -> RunOutcome {
    run_stacked_fuel(x, &mut Fuel::new(fuel), opts, &mut |_, _, _| {})
}

pub fn run_stacked(x: &StackedConfig, fuel: u64) -> RunOutcome {
    run_stacked_with(x, fuel, &EvalOptions::default())
}

/// Every ⇀ rule whose premises hold, each checked independently.
pub fn stacked_rule_scan(x: &StackedConfig, fuel: u64, opts: &EvalOptions) -> Vec<&'static str> {
    let mut rules = Vec::new();
    let head = x.head();
    let box_positions = |m: &Term| context_splits(m).into_iter().filter(|(_, n)| is_box_lift(n)).count();
    let head_boxes = box_positions(&head.term);
    if head_boxes == 0 && !small_rule_scan(&head.circuit, &head.term, fuel, opts).0.is_empty() {
        rules.push("head");
    }
    rules.extend(std::iter::repeat_n("step-in", head_boxes));
    if head.locals.is_some() && head.term.is_label_tuple() {
        if let Some(below) = x.frames.get(1) {
            rules.extend(std::iter::repeat_n("step-out", box_positions(&below.term)));
        }
    }
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::LabelContext;
    use crate::syntax::{parse, LabelId};

    fn single(src: &str) -> StackedConfig {
        StackedConfig::single(identity(&LabelContext::new()), parse(src).unwrap())
    }

    fn step(x: &StackedConfig) -> (StackedConfig, StackedRule) {
        stacked_step(x, &EvalOptions::default()).unwrap()
    }

    #[test]
    fn head_mirrors_small_step() {
        let (x, r) = step(&single("(\\x:!(Qubit -o Qubit). x) (lift \\y:Qubit. y)"));
        assert_eq!(r, StackedRule::Head(SmallRule::Beta));
        assert_eq!(x.frames.len(), 1);
    }

    #[test]
    fn step_in_then_out() {
        let x = single("box[Qubit](lift \\x:Qubit. x)");
        let (x1, r) = step(&x);
        assert_eq!(r, StackedRule::StepIn);
        assert_eq!(x1.depth(), 2);
        assert_eq!(x1.head().locals, Some(LabelTuple::Leaf(LabelId(0))));
        assert!(is_reachable_shape(&x1));
        let (x2, _) = step(&x1);
        let (x3, r) = step(&x2);
        assert_eq!(r, StackedRule::StepOut);
        assert_eq!(x3.depth(), 1);
        assert!(matches!(x3.head().term, Term::BoxedCirc(..)));
        assert!(x3.is_final());
    }

    #[test]
    fn unreachable_shape() {
        let lam = parse("\\x:Qubit. x").unwrap();
        let e = identity(&LabelContext::new());
        let x = StackedConfig {
            frames: vec![
                StackFrame { circuit: e.clone(), term: lam.clone(), locals: Some(LabelTuple::Leaf(LabelId(1))) },
                StackFrame { circuit: e, term: lam, locals: None },
            ],
        };
        assert!(x.is_well_formed());
        assert!(!is_reachable_shape(&x));
    }

    #[test]
    fn run_outcomes() {
        assert!(matches!(run_stacked(&single("#0"), 10), RunOutcome::Converged { steps: 0, .. }));
        assert!(matches!(run_stacked(&single("force #0"), 10), RunOutcome::Deadlocked { .. }));
        let omega = "box[Qubit](lift \\q:Qubit. (\\w:!(Qubit -o Qubit). (force w) w) (lift \\w:!(Qubit -o Qubit). (force w) w))";
        assert!(matches!(run_stacked(&single(omega), 300), RunOutcome::FuelExhausted { .. }));
    }
}
