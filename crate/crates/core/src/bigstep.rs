//! The ⇓ relation as a fuel-bounded recursive evaluator.

use crate::circuit::{append, freshlabels, identity, LabelledCircuit};
use crate::correspondence::{RunOutcome, SmallConfig};
use crate::mutant::{EvalOptions, Fuel, Mutant};
use crate::syntax::{substitute, LabelTuple, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BigOutcome {
    Value(LabelledCircuit, Term),
    Error { site: Term, reason: String },
    OutOfFuel,
}

enum Halt {
    Error(Term, String),
    OutOfFuel,
}

type EResult = Result<(LabelledCircuit, Term), Halt>;

struct Eval<'o> {
    fuel: Fuel,
    opts: &'o EvalOptions,
}

fn error<T>(site: &Term, reason: impl Into<String>) -> Result<T, Halt> {
    Err(Halt::Error(site.clone(), reason.into()))
}

impl Eval<'_> {
    fn eval(&mut self, c: LabelledCircuit, m: &Term) -> EResult {
        if !self.fuel.tick() {
            return Err(Halt::OutOfFuel);
        }
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.eval_inner(c, m))
    }

    fn eval_inner(&mut self, c: LabelledCircuit, m: &Term) -> EResult {
        match m {
            Term::Var(x) => error(m, format!("free variable `{x}`")),
            Term::Lab(_) | Term::Abs(..) | Term::Lift(_) | Term::BoxedCirc(..) => Ok((c, m.clone())),
            Term::App(f, a) => {
                let (c1, fv) = self.eval(c, f)?;
                let Term::Abs(x, _, body) = &fv else {
                    return error(&fv, "application of a non-function");
                };
                let (c2, av) = self.eval(c1, a)?;
                self.eval(c2, &substitute(body, &av, x))
            }
            Term::Pair(l, r) => {
                let (c1, v) = self.eval(c, l)?;
                let (c2, w) = self.eval(c1, r)?;
                if self.opts.is(Mutant::BigPairSwap) {
                    return Ok((c2, Term::pair(w, v)));
                }
                Ok((c2, Term::pair(v, w)))
            }
            Term::LetPair(x, y, bound, body) => {
                let (c1, v) = self.eval(c, bound)?;
                let Term::Pair(v1, v2) = &v else {
                    return error(&v, "let destructs a non-pair");
                };
                let body = substitute(&substitute(body, v1, x), v2, y);
                self.eval(c1, &body)
            }
            Term::Force(b) => {
                let (c1, v) = self.eval(c, b)?;
                let Term::Lift(n) = &v else {
                    return error(&v, "force of a non-lifted value");
                };
                self.eval(c1, n)
            }
            Term::BoxT(t, b) => {
                let (c1, v) = self.eval(c, b)?;
                let Term::Lift(n) = &v else {
                    return error(&v, "box of a non-lifted value");
                };
                let (q, ins) = match freshlabels(n, t) {
                    Ok(r) => r,
                    Err(e) => return error(m, e.to_string()),
                };
                let (d, out) = self.eval(identity(&q), &Term::app((**n).clone(), ins.to_term()))?;
                let Some(outs) = LabelTuple::from_term(&out) else {
                    return error(&out, "boxed function returned a non-label value");
                };
                Ok((c1, Term::boxed(ins, d, outs)))
            }
            Term::ApplyC(circ, k) => {
                let (c1, cv) = self.eval(c, circ)?;
                let Term::BoxedCirc(ins, d, outs) = &cv else {
                    return error(&cv, "apply of a non-circuit");
                };
                let (c2, kv) = self.eval(c1, k)?;
                let Some(kt) = LabelTuple::from_term(&kv) else {
                    return error(&kv, "apply to a non-label argument");
                };
                match append(&c2, &kt, ins, d, outs) {
                    Ok((c3, k2)) => Ok((c3, k2.to_term())),
                    Err(e) => error(m, e.to_string()),
                }
            }
        }
    }
}

/// Returns the outcome and the fuel consumed.
pub fn big_eval_with(cfg: &SmallConfig, fuel: u64, opts: &EvalOptions) -> (BigOutcome, u64) {
    let mut ev = Eval { fuel: Fuel::new(fuel), opts };
    let r = ev.eval(cfg.circuit.clone(), &cfg.term);
    let out = match r {
        Ok((c, v)) => BigOutcome::Value(c, v),
        Err(Halt::Error(site, reason)) => BigOutcome::Error { site, reason },
        Err(Halt::OutOfFuel) => BigOutcome::OutOfFuel,
    };
    (out, ev.fuel.used)
}

pub fn big_eval(cfg: &SmallConfig, fuel: u64) -> BigOutcome {
    big_eval_with(cfg, fuel, &EvalOptions::default()).0
}

/// Big-step result in the common outcome vocabulary; `Error` maps to `Deadlocked`.
pub fn run_big(cfg: &SmallConfig, fuel: u64, opts: &EvalOptions) -> RunOutcome {
    let (out, used) = big_eval_with(cfg, fuel, opts);
    match out {
        BigOutcome::Value(circuit, value) => RunOutcome::Converged { circuit, value, steps: used },
        BigOutcome::Error { site, reason } => {
            RunOutcome::Deadlocked { state: site.to_string(), reason, steps: used }
        }
        BigOutcome::OutOfFuel => RunOutcome::FuelExhausted { state: cfg.term.to_string(), steps: used },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{equiv, GateSignature, LabelContext};
    use crate::syntax::{parse, LabelId};
    use crate::types::WireType;

    fn cfg(src: &str, ls: &[u32]) -> SmallConfig {
        let q: LabelContext = ls.iter().map(|n| (LabelId(*n), WireType::qubit())).collect();
        SmallConfig { circuit: identity(&q), term: parse(src).unwrap() }
    }

    #[test]
    fn values_self_evaluate() {
        let c = cfg("\\x:Qubit. x", &[]);
        assert_eq!(big_eval(&c, 10), BigOutcome::Value(c.circuit.clone(), c.term.clone()));
    }

    #[test]
    fn apply_extends_circuit() {
        let BigOutcome::Value(c, v) = big_eval(&cfg("apply(gate H, #0)", &[0]), 100) else { panic!() };
        assert_eq!(c.gates.len(), 1);
        assert_eq!(v, Term::Lab(LabelId(1)));
        assert_eq!(c.outputs.labels().collect::<Vec<_>>(), vec![LabelId(1)]);
    }

    #[test]
    fn force_of_label_is_error() {
        assert!(matches!(big_eval(&cfg("force #0", &[0]), 100), BigOutcome::Error { .. }));
    }

    #[test]
    fn hadamard_boxing() {
        let c = cfg("box[Qubit](lift \\x:Qubit. apply(gate H, x))", &[]);
        let BigOutcome::Value(after, Term::BoxedCirc(_, d, _)) = big_eval(&c, 100) else { panic!() };
        assert_eq!(after, c.circuit);
        let (h, _) = GateSignature::default_signature().gate_literal("H", LabelId(0)).unwrap();
        let Term::BoxedCirc(_, hc, _) = h else { unreachable!() };
        assert!(equiv(&d, &hc));
    }

    #[test]
    fn fuel_exhaustion_is_not_error() {
        let omega = "(\\w:!(Qubit -o Qubit). (force w) w) (lift \\w:!(Qubit -o Qubit). (force w) w)";
        assert_eq!(big_eval(&cfg(omega, &[]), 1000), BigOutcome::OutOfFuel);
    }
}
