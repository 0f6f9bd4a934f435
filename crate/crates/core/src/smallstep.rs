//! The → relation: redex rules applied through evaluation contexts.

use std::fmt;

use crate::circuit::{append, freshlabels, identity, LabelledCircuit};
use crate::correspondence::{RunOutcome, SmallConfig};
use crate::mutant::{EvalOptions, Fuel, Mutant};
use crate::syntax::{substitute, LabelTuple, Term};
use crate::types::TypeExpr;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    AppL(Term),
    AppR(Term),
    PairL(Term),
    PairR(Term),
    LetF(String, String, Term),
    ForceF,
    BoxF(TypeExpr),
    ApplyL(Term),
    ApplyR(Term),
}

impl Frame {
    pub fn plug(&self, m: Term) -> Term {
        match self {
            Frame::AppL(n) => Term::app(m, n.clone()),
            Frame::AppR(v) => Term::app(v.clone(), m),
            Frame::PairL(n) => Term::pair(m, n.clone()),
            Frame::PairR(v) => Term::pair(v.clone(), m),
            Frame::LetF(x, y, n) => Term::let_pair(x.clone(), y.clone(), m, n.clone()),
            Frame::ForceF => Term::force(m),
            Frame::BoxF(t) => Term::box_t(t.clone(), m),
            Frame::ApplyL(n) => Term::apply(m, n.clone()),
            Frame::ApplyR(v) => Term::apply(v.clone(), m),
        }
    }
}

/// An evaluation context as its spine; `frames[0]` is adjacent to the hole.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvalContext {
    pub frames: Vec<Frame>,
}

impl EvalContext {
    pub fn hole() -> Self {
        EvalContext::default()
    }

    pub fn plug(&self, m: Term) -> Term {
        self.frames.iter().fold(m, |acc, f| f.plug(acc))
    }

    /// `self[inner[·]]`
    pub fn compose(&self, inner: &EvalContext) -> EvalContext {
        EvalContext { frames: inner.frames.iter().chain(&self.frames).cloned().collect() }
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }
}

/// The unique split `m = E[r]` with `r` a proto-redex; `None` iff `m` is a value.
pub fn decompose(m: &Term) -> Option<(EvalContext, Term)> {
    if m.is_value() {
        return None;
    }
    let mut frames = Vec::new();
    let mut cur = m;
    loop {
        let next = match cur {
            Term::App(f, a) | Term::ApplyC(f, a) => {
                let apply = matches!(cur, Term::ApplyC(..));
                if !f.is_value() {
                    frames.push(if apply { Frame::ApplyL((**a).clone()) } else { Frame::AppL((**a).clone()) });
                    Some(&**f)
                } else if !a.is_value() {
                    frames.push(if apply { Frame::ApplyR((**f).clone()) } else { Frame::AppR((**f).clone()) });
                    Some(&**a)
                } else {
                    None
                }
            }
            Term::Pair(l, r) => {
                if !l.is_value() {
                    frames.push(Frame::PairL((**r).clone()));
                    Some(&**l)
                } else {
                    frames.push(Frame::PairR((**l).clone()));
                    Some(&**r)
                }
            }
            Term::LetPair(x, y, b, n) if !b.is_value() => {
                frames.push(Frame::LetF(x.clone(), y.clone(), (**n).clone()));
                Some(&**b)
            }
            Term::Force(b) if !b.is_value() => {
                frames.push(Frame::ForceF);
                Some(&**b)
            }
            Term::BoxT(t, b) if !b.is_value() => {
                frames.push(Frame::BoxF(t.clone()));
                Some(&**b)
            }
            _ => None,
        };
        match next {
            Some(n) => cur = n,
            None => break,
        }
    }
    frames.reverse();
    Some((EvalContext { frames }, cur.clone()))
}

/// Every way of writing `m` as `E[n]` by the context grammar, `n` arbitrary.
pub fn context_splits(m: &Term) -> Vec<(EvalContext, Term)> {
    let mut out = vec![(EvalContext::hole(), m.clone())];
    let sub = |frame: Frame, inner: &Term, out: &mut Vec<(EvalContext, Term)>| {
        for (mut e, n) in context_splits(inner) {
            e.frames.push(frame.clone());
            out.push((e, n));
        }
    };
    match m {
        Term::App(f, a) => {
            sub(Frame::AppL((**a).clone()), f, &mut out);
            if f.is_value() {
                sub(Frame::AppR((**f).clone()), a, &mut out);
            }
        }
        Term::ApplyC(f, a) => {
            sub(Frame::ApplyL((**a).clone()), f, &mut out);
            if f.is_value() {
                sub(Frame::ApplyR((**f).clone()), a, &mut out);
            }
        }
        Term::Pair(l, r) => {
            sub(Frame::PairL((**r).clone()), l, &mut out);
            if l.is_value() {
                sub(Frame::PairR((**l).clone()), r, &mut out);
            }
        }
        Term::LetPair(x, y, b, n) => sub(Frame::LetF(x.clone(), y.clone(), (**n).clone()), b, &mut out),
        Term::Force(b) => sub(Frame::ForceF, b, &mut out),
        Term::BoxT(t, b) => sub(Frame::BoxF(t.clone()), b, &mut out),
        _ => {}
    }
    out
}

pub fn is_box_lift(m: &Term) -> bool {
    matches!(m, Term::BoxT(_, b) if matches!(**b, Term::Lift(_)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmallRule {
    Beta,
    Let,
    Force,
    Box,
    Apply,
}

impl SmallRule {
    pub fn name(self) -> &'static str {
        match self {
            SmallRule::Beta => "beta",
            SmallRule::Let => "let",
            SmallRule::Force => "force",
            SmallRule::Box => "box",
            SmallRule::Apply => "apply",
        }
    }
}

impl fmt::Display for SmallRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StuckReason {
    BadRedexShape(String),
    InnerDeadlock(String),
    InnerNotLabels(String),
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::BadRedexShape(s) => write!(f, "BadRedexShape: {s}"),
            StuckReason::InnerDeadlock(s) => write!(f, "InnerDeadlock: {s}"),
            StuckReason::InnerNotLabels(s) => write!(f, "InnerNotLabels: {s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped { next: SmallConfig, rule: SmallRule, redex: Term },
    Normal(Term),
    Stuck { site: Term, reason: StuckReason },
    OutOfFuel,
}

/// One of beta, let, force or apply at a redex; `None` for box redexes.
pub(crate) fn reduce_plain(
    c: &LabelledCircuit,
    r: &Term,
    opts: &EvalOptions,
) -> Option<Result<(LabelledCircuit, Term, SmallRule), StuckReason>> {
    let bad = |s: &str| Some(Err(StuckReason::BadRedexShape(s.to_string())));
    match r {
        Term::App(f, v) => match &**f {
            Term::Abs(x, _, body) => Some(Ok((c.clone(), substitute(body, v, x), SmallRule::Beta))),
            _ => bad("application of a non-function"),
        },
        Term::LetPair(x, y, v, body) => match &**v {
            Term::Pair(v1, v2) => {
                let (a, b) = if opts.is(Mutant::SmallLetSwap) { (v2, v1) } else { (v1, v2) };
                Some(Ok((c.clone(), substitute(&substitute(body, a, x), b, y), SmallRule::Let)))
            }
            _ => bad("let destructs a non-pair"),
        },
        Term::Force(v) => match &**v {
            Term::Lift(m) => Some(Ok((c.clone(), (**m).clone(), SmallRule::Force))),
            _ => bad("force of a non-lifted value"),
        },
        Term::ApplyC(circ, k) => {
            let Term::BoxedCirc(ins, d, outs) = &**circ else {
                return bad("apply of a non-circuit");
            };
            let Some(kt) = LabelTuple::from_term(k) else {
                return bad("apply to a non-label argument");
            };
            match append(c, &kt, ins, d, outs) {
                Ok((c2, k2)) => {
                    let c2 = if opts.is(Mutant::SmallApplyKeepsCircuit) { c.clone() } else { c2 };
                    Some(Ok((c2, k2.to_term(), SmallRule::Apply)))
                }
                Err(e) => Some(Err(StuckReason::BadRedexShape(e.to_string()))),
            }
        }
        Term::BoxT(_, v) => match &**v {
            Term::Lift(_) => None,
            _ => bad("box of a non-lifted value"),
        },
        Term::Var(x) => Some(Err(StuckReason::BadRedexShape(format!("free variable `{x}`")))),
        _ => bad("no rule for this term"),
    }
}

/// One → step. Box redexes run their body to completion, drawing on `fuel`.
pub fn small_step(cfg: &SmallConfig, fuel: &mut Fuel, opts: &EvalOptions) -> StepOutcome {
    let Some((ctx, redex)) = decompose(&cfg.term) else {
        return StepOutcome::Normal(cfg.term.clone());
    };
    let stepped = |c: LabelledCircuit, m: Term, rule| StepOutcome::Stepped {
        next: SmallConfig { circuit: c, term: ctx.plug(m) },
        rule,
        redex: redex.clone(),
    };
    if let Some(r) = reduce_plain(&cfg.circuit, &redex, opts) {
        return match r {
            Ok((c, m, rule)) => stepped(c, m, rule),
            Err(reason) => StepOutcome::Stuck { site: redex.clone(), reason },
        };
    }
    let Term::BoxT(t, lifted) = &redex else { unreachable!() };
    let Term::Lift(n) = &**lifted else { unreachable!() };
    let (q, ins) = match freshlabels(n, t) {
        Ok(r) => r,
        Err(e) => return StepOutcome::Stuck { site: redex.clone(), reason: StuckReason::BadRedexShape(e.to_string()) },
    };
    let inner = SmallConfig { circuit: identity(&q), term: Term::app((**n).clone(), ins.to_term()) };
    match run_small_fuel(&inner, fuel, opts, &mut |_| {}) {
        RunOutcome::Converged { circuit, value, .. } => match LabelTuple::from_term(&value) {
            Some(outs) => stepped(cfg.circuit.clone(), Term::boxed(ins, circuit, outs), SmallRule::Box),
            None => StepOutcome::Stuck { site: redex.clone(), reason: StuckReason::InnerNotLabels(value.to_string()) },
        },
        RunOutcome::Deadlocked { reason, .. } => {
            StepOutcome::Stuck { site: redex.clone(), reason: StuckReason::InnerDeadlock(reason) }
        }
        RunOutcome::FuelExhausted { .. } => StepOutcome::OutOfFuel,
    }
}

/// A top-level step as seen by trace observers.
pub struct SmallStepEvent<'a> {
    pub before: &'a SmallConfig,
    pub after: &'a SmallConfig,
    pub rule: SmallRule,
    pub redex: &'a Term,
}

pub fn run_small_fuel(
    cfg: &SmallConfig,
    fuel: &mut Fuel,
    opts: &EvalOptions,
    observe: &mut dyn FnMut(&SmallStepEvent),
) -> RunOutcome {
    let start = fuel.used;
    let mut cur = cfg.clone();
    loop {
        if cur.term.is_value() {
            return RunOutcome::Converged { circuit: cur.circuit, value: cur.term, steps: fuel.used - start };
        }
        if !fuel.tick() {
            return RunOutcome::FuelExhausted { state: cur.term.to_string(), steps: fuel.used - start };
        }
        match small_step(&cur, fuel, opts) {
            StepOutcome::Stepped { next, rule, redex } => {
                observe(&SmallStepEvent { before: &cur, after: &next, rule, redex: &redex });
                cur = next;
            }
            StepOutcome::Normal(_) => unreachable!("checked above"),
            StepOutcome::Stuck { site, reason } => {
                return RunOutcome::Deadlocked {
                    state: cur.term.to_string(),
                    reason: format!("{reason} at {site}"),
                    steps: fuel.used - start,
                }
            }
            StepOutcome::OutOfFuel => {
                return RunOutcome::FuelExhausted { state: cur.term.to_string(), steps: fuel.used - start }
            }
        }
    }
}

pub fn run_small_with(cfg: &SmallConfig, fuel: u64, opts: &EvalOptions) -> RunOutcome {
    run_small_fuel(cfg, &mut Fuel::new(fuel), opts, &mut |_| {})
}

pub fn run_small(cfg: &SmallConfig, fuel: u64) -> RunOutcome {
    run_small_with(cfg, fuel, &EvalOptions::default())
}

/// Names of every → rule whose premises hold at `(c, m)`, checked rule by rule
/// against the contextual presentation. The second component is the largest
/// count seen at any level of the derivation.
pub fn small_rule_scan(c: &LabelledCircuit, m: &Term, fuel: u64, opts: &EvalOptions) -> (Vec<&'static str>, usize) {
    let mut rules = Vec::new();
    let mut worst = 0;
    let premise = |name: &'static str, inner: &Term, rules: &mut Vec<&'static str>, worst: &mut usize| {
        let (r, w) = small_rule_scan(c, inner, fuel, opts);
        *worst = (*worst).max(w);
        if !r.is_empty() {
            rules.push(name);
        }
    };
    match m {
        Term::App(f, a) => {
            if matches!(**f, Term::Abs(..)) && a.is_value() {
                rules.push("beta");
            }
            premise("app-left", f, &mut rules, &mut worst);
            if f.is_value() {
                premise("app-right", a, &mut rules, &mut worst);
            }
        }
        Term::LetPair(_, _, b, _) => {
            if matches!(**b, Term::Pair(..)) && b.is_value() {
                rules.push("let");
            }
            premise("let-ctx", b, &mut rules, &mut worst);
        }
        Term::Force(b) => {
            if matches!(**b, Term::Lift(_)) {
                rules.push("force");
            }
            premise("force-ctx", b, &mut rules, &mut worst);
        }
        Term::BoxT(t, b) => {
            if let Term::Lift(n) = &**b {
                if let Ok((q, ins)) = freshlabels(n, t) {
                    let inner = SmallConfig { circuit: identity(&q), term: Term::app((**n).clone(), ins.to_term()) };
                    if let RunOutcome::Converged { value, .. } = run_small_with(&inner, fuel, opts) {
                        if value.is_label_tuple() {
                            rules.push("box");
                        }
                    }
                }
            }
            premise("box-ctx", b, &mut rules, &mut worst);
        }
        Term::ApplyC(f, a) => {
            if let (Term::BoxedCirc(ins, d, outs), Some(k)) = (&**f, LabelTuple::from_term(a)) {
                if append(c, &k, ins, d, outs).is_ok() {
                    rules.push("apply");
                }
            }
            premise("apply-left", f, &mut rules, &mut worst);
            if f.is_value() {
                premise("apply-right", a, &mut rules, &mut worst);
            }
        }
        Term::Pair(l, r) => {
            premise("pair-left", l, &mut rules, &mut worst);
            if l.is_value() {
                premise("pair-right", r, &mut rules, &mut worst);
            }
        }
        _ => {}
    }
    worst = worst.max(rules.len());
    (rules, worst)
}
