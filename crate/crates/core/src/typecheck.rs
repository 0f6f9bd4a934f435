//! Algorithmic linear type checking: each linear variable and label is consumed
//! exactly once, parameter variables freely.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::{LabelContext, LabelledCircuit};
use crate::syntax::{free_labels, LabelId, LabelTuple, Term};
pub use crate::types::TypeExpr;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    pub vars: BTreeMap<String, TypeExpr>,
    pub labels: LabelContext,
}

impl TypingContext {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_labels(labels: LabelContext) -> Self {
        TypingContext { vars: BTreeMap::new(), labels }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    LinearReuse(String),
    LinearUnused(String),
    LabelUnused(LabelId),
    Mismatch { expected: TypeExpr, found: TypeExpr },
    NotAFunction(TypeExpr),
    NotABang(TypeExpr),
    NotACirc(TypeExpr),
    NotATuple(TypeExpr),
    UnboundVar(String),
    UnboundLabel(LabelId),
    LiftNotClosedLinear(String),
    BoxShape(String),
    DuplicateBinder(String),
    FrontierMismatch(String),
}

impl TypeErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            TypeErrorKind::LinearReuse(_) => "LinearReuse",
            TypeErrorKind::LinearUnused(_) => "LinearUnused",
            TypeErrorKind::LabelUnused(_) => "LabelUnused",
            TypeErrorKind::Mismatch { .. } => "Mismatch",
            TypeErrorKind::NotAFunction(_) => "NotAFunction",
            TypeErrorKind::NotABang(_) => "NotABang",
            TypeErrorKind::NotACirc(_) => "NotACirc",
            TypeErrorKind::NotATuple(_) => "NotATuple",
            TypeErrorKind::UnboundVar(_) => "UnboundVar",
            TypeErrorKind::UnboundLabel(_) => "UnboundLabel",
            TypeErrorKind::LiftNotClosedLinear(_) => "LiftNotClosedLinear",
            TypeErrorKind::BoxShape(_) => "BoxShape",
            TypeErrorKind::DuplicateBinder(_) => "DuplicateBinder",
            TypeErrorKind::FrontierMismatch(_) => "FrontierMismatch",
        }
    }

    pub fn message(&self) -> String {
        match self {
            TypeErrorKind::LinearReuse(x) => format!("linear resource `{x}` used more than once"),
            TypeErrorKind::LinearUnused(x) => format!("linear variable `{x}` is never used"),
            TypeErrorKind::LabelUnused(l) => format!("label {l} is never used"),
            TypeErrorKind::Mismatch { expected, found } => format!("expected {expected}, found {found}"),
            TypeErrorKind::NotAFunction(t) => format!("expected a linear function, found {t}"),
            TypeErrorKind::NotABang(t) => format!("expected a lifted (!) type, found {t}"),
            TypeErrorKind::NotACirc(t) => format!("expected a circuit type, found {t}"),
            TypeErrorKind::NotATuple(t) => format!("expected a tensor type, found {t}"),
            TypeErrorKind::UnboundVar(x) => format!("unbound variable `{x}`"),
            TypeErrorKind::UnboundLabel(l) => format!("label {l} is not in the label context"),
            TypeErrorKind::LiftNotClosedLinear(x) => {
                format!("lifted term uses linear resource `{x}` from outside the lift")
            }
            TypeErrorKind::BoxShape(s) | TypeErrorKind::FrontierMismatch(s) => s.clone(),
            TypeErrorKind::DuplicateBinder(x) => format!("`{x}` bound twice by one let"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// Child-index path from the root to the offending subterm.
    pub path: Vec<u8>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.kind.message())
    }
}

impl std::error::Error for TypeError {}

struct Entry {
    name: String,
    ty: TypeExpr,
    linear: bool,
    used: bool,
}

struct Checker {
    vars: Vec<Entry>,
    labels: BTreeMap<LabelId, (crate::types::WireType, bool)>,
    barrier: usize,
    in_lift: bool,
    path: Vec<u8>,
}

type TResult = Result<TypeExpr, TypeError>;

impl Checker {
    fn err<T>(&self, kind: TypeErrorKind) -> Result<T, TypeError> {
        Err(TypeError { kind, path: self.path.clone() })
    }

    fn child(&mut self, i: u8, m: &Term) -> TResult {
        self.path.push(i);
        let r = self.check(m);
        self.path.pop();
        r
    }

    fn bind(&mut self, name: &str, ty: &TypeExpr) {
        self.vars.push(Entry { name: name.to_string(), ty: ty.clone(), linear: ty.is_linear(), used: false });
    }

    fn unbind(&mut self) -> Result<(), TypeError> {
        let e = self.vars.pop().expect("balanced bind");
        if e.linear && !e.used {
            return self.err(TypeErrorKind::LinearUnused(e.name));
        }
        Ok(())
    }

    fn expect_eq(&mut self, i: u8, expected: &TypeExpr, found: TypeExpr) -> Result<(), TypeError> {
        if *expected != found {
            self.path.push(i);
            let e = self.err(TypeErrorKind::Mismatch { expected: expected.clone(), found });
            self.path.pop();
            return e;
        }
        Ok(())
    }

    fn check(&mut self, m: &Term) -> TResult {
        stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.check_inner(m))
    }

    fn check_inner(&mut self, m: &Term) -> TResult {
        match m {
            Term::Var(x) => {
                let Some(idx) = self.vars.iter().rposition(|e| e.name == *x) else {
                    return self.err(TypeErrorKind::UnboundVar(x.clone()));
                };
                let e = &self.vars[idx];
                if e.linear {
                    if idx < self.barrier {
                        return self.err(TypeErrorKind::LiftNotClosedLinear(x.clone()));
                    }
                    if e.used {
                        return self.err(TypeErrorKind::LinearReuse(x.clone()));
                    }
                    self.vars[idx].used = true;
                }
                Ok(self.vars[idx].ty.clone())
            }
            Term::Lab(l) => {
                if self.in_lift {
                    return self.err(TypeErrorKind::LiftNotClosedLinear(l.to_string()));
                }
                match self.labels.get_mut(l) {
                    None => self.err(TypeErrorKind::UnboundLabel(*l)),
                    Some((_, true)) => self.err(TypeErrorKind::LinearReuse(l.to_string())),
                    Some((w, used)) => {
                        *used = true;
                        Ok(TypeExpr::Wire(w.clone()))
                    }
                }
            }
            Term::Abs(x, a, body) => {
                self.bind(x, a);
                let b = self.child(0, body)?;
                self.unbind()?;
                Ok(TypeExpr::lolli(a.clone(), b))
            }
            Term::App(f, a) => {
                let tf = self.child(0, f)?;
                let TypeExpr::Lolli(dom, cod) = tf else {
                    return self.err(TypeErrorKind::NotAFunction(tf));
                };
                let ta = self.child(1, a)?;
                self.expect_eq(1, &dom, ta)?;
                Ok(*cod)
            }
            Term::Pair(l, r) => {
                let a = self.child(0, l)?;
                let b = self.child(1, r)?;
                Ok(TypeExpr::tensor(a, b))
            }
            Term::LetPair(x, y, bound, body) => {
                if x == y {
                    return self.err(TypeErrorKind::DuplicateBinder(x.clone()));
                }
                let t = self.child(0, bound)?;
                let TypeExpr::Tensor(a, b) = t else {
                    return self.err(TypeErrorKind::NotATuple(t));
                };
                self.bind(x, &a);
                self.bind(y, &b);
                let c = self.child(1, body)?;
                self.unbind()?;
                self.unbind()?;
                Ok(c)
            }
            Term::Lift(body) => {
                let saved = (self.barrier, self.in_lift);
                self.barrier = self.vars.len();
                self.in_lift = true;
                let r = self.child(0, body);
                (self.barrier, self.in_lift) = saved;
                Ok(TypeExpr::bang(r?))
            }
            Term::Force(body) => match self.child(0, body)? {
                TypeExpr::Bang(a) => Ok(*a),
                t => self.err(TypeErrorKind::NotABang(t)),
            },
            Term::BoxT(t, body) => {
                if !t.is_simple_m_type() {
                    return self.err(TypeErrorKind::BoxShape(format!("box annotation {t} is not a simple M-type")));
                }
                let tb = self.child(0, body)?;
                let TypeExpr::Bang(inner) = tb else {
                    return self.err(TypeErrorKind::NotABang(tb));
                };
                let TypeExpr::Lolli(dom, cod) = *inner else {
                    return self.err(TypeErrorKind::NotAFunction(*inner));
                };
                self.expect_eq(0, t, *dom)?;
                if !cod.is_simple_m_type() {
                    return self.err(TypeErrorKind::BoxShape(format!("boxed function returns {cod}, not a simple M-type")));
                }
                Ok(TypeExpr::circ(t.clone(), *cod))
            }
            Term::ApplyC(c, k) => {
                let tc = self.child(0, c)?;
                let TypeExpr::Circ(t, u) = tc else {
                    return self.err(TypeErrorKind::NotACirc(tc));
                };
                let tk = self.child(1, k)?;
                self.expect_eq(1, &t, tk)?;
                Ok(*u)
            }
            Term::BoxedCirc(ins, c, outs) => match boxed_type(ins, c, outs) {
                Ok(t) => Ok(t),
                Err(msg) => self.err(TypeErrorKind::BoxShape(msg)),
            },
        }
    }
}

/// The circ rule: `Circ(T, U)` when `ins`/`outs` type exactly the circuit's frontiers.
pub fn boxed_type(ins: &LabelTuple, c: &LabelledCircuit, outs: &LabelTuple) -> Result<TypeExpr, String> {
    c.check_wiring().map_err(|e| e.to_string())?;
    let side = |t: &LabelTuple, q: &LabelContext, what: &str| {
        let leaves: BTreeSet<LabelId> = t.leaves().into_iter().collect();
        if t.has_duplicates() || leaves != q.labels().collect::<BTreeSet<_>>() {
            return Err(format!("{what} tuple {t} does not enumerate the circuit's {what}s {q}"));
        }
        Ok(q.type_of_tuple(t).expect("leaves covered"))
    };
    let t = side(ins, &c.inputs, "input")?;
    let u = side(outs, &c.outputs, "output")?;
    Ok(TypeExpr::circ(t, u))
}

/// `ctx ⊢ m : A`, consuming every linear entry of `ctx` exactly once.
pub fn typecheck(ctx: &TypingContext, m: &Term) -> Result<TypeExpr, TypeError> {
    let mut ch = Checker {
        vars: Vec::new(),
        labels: ctx.labels.iter().map(|(l, w)| (l, (w.clone(), false))).collect(),
        barrier: 0,
        in_lift: false,
        path: Vec::new(),
    };
    for (x, t) in &ctx.vars {
        ch.bind(x, t);
    }
    let t = ch.check(m)?;
    for e in &ch.vars {
        if e.linear && !e.used {
            return ch.err(TypeErrorKind::LinearUnused(e.name.clone()));
        }
    }
    if let Some((l, _)) = ch.labels.iter().find(|(_, (_, used))| !used) {
        return ch.err(TypeErrorKind::LabelUnused(*l));
    }
    Ok(t)
}

/// `q_in ⊢ (c, m) : a ; q_out`
pub fn welltyped_config(
    q_in: &LabelContext,
    c: &LabelledCircuit,
    m: &Term,
    a: &TypeExpr,
    q_out: &LabelContext,
) -> Result<(), TypeError> {
    let frontier = |msg: String| Err(TypeError { kind: TypeErrorKind::FrontierMismatch(msg), path: Vec::new() });
    if c.check_wiring().is_err() {
        return frontier("circuit wiring is not linear".to_string());
    }
    if c.inputs != *q_in {
        return frontier(format!("circuit inputs {} differ from {}", c.inputs, q_in));
    }
    let fl = free_labels(m);
    if let Some(l) = fl.iter().find(|l| !c.outputs.contains(**l)) {
        return frontier(format!("{l} is not an output of the circuit"));
    }
    let q2 = c.outputs.restrict(&fl);
    let mut rest = c.outputs.clone();
    for l in q2.labels() {
        rest.remove(l);
    }
    if rest != *q_out {
        return frontier(format!("remaining outputs {} differ from {}", rest, q_out));
    }
    let t = typecheck(&TypingContext::with_labels(q2), m)?;
    if t != *a {
        return Err(TypeError { kind: TypeErrorKind::Mismatch { expected: a.clone(), found: t }, path: Vec::new() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::identity;
    use crate::syntax::parse;
    use crate::types::WireType;

    fn q() -> TypeExpr {
        TypeExpr::qubit()
    }

    fn labels(ls: &[u32]) -> LabelContext {
        ls.iter().map(|n| (LabelId(*n), WireType::qubit())).collect()
    }

    fn check(src: &str, ls: &[u32]) -> Result<TypeExpr, TypeErrorKind> {
        typecheck(&TypingContext::with_labels(labels(ls)), &parse(src).unwrap()).map_err(|e| e.kind)
    }

    #[test]
    fn label_rule() {
        assert_eq!(check("#0", &[0]), Ok(q()));
        assert_eq!(check("#1", &[0]), Err(TypeErrorKind::UnboundLabel(LabelId(1))));
        assert_eq!(check("<#0, #0>", &[0]), Err(TypeErrorKind::LinearReuse("#0".into())));
        assert_eq!(check("#0", &[0, 1]), Err(TypeErrorKind::LabelUnused(LabelId(1))));
    }

    #[test]
    fn cloning_is_rejected() {
        assert_eq!(check("\\x:Qubit. <x, x>", &[]), Err(TypeErrorKind::LinearReuse("x".into())));
        assert_eq!(check("\\x:Qubit. \\y:Qubit. x", &[]), Err(TypeErrorKind::LinearUnused("y".into())));
    }

    #[test]
    fn gate_literal_and_box() {
        assert_eq!(check("gate H", &[]), Ok(TypeExpr::circ(q(), q())));
        assert_eq!(
            check("box[Qubit](lift \\x:Qubit. apply(gate H, x))", &[]),
            Ok(TypeExpr::circ(q(), q()))
        );
        assert_eq!(check("apply(gate Meas, #0)", &[0]), Ok(TypeExpr::bit()));
    }

    #[test]
    fn lift_is_closed_under_linear_resources() {
        assert_eq!(
            check("\\x:Qubit. <lift x, x>", &[]),
            Err(TypeErrorKind::LiftNotClosedLinear("x".into()))
        );
        assert_eq!(check("lift #0", &[0]), Err(TypeErrorKind::LiftNotClosedLinear("#0".into())));
        assert_eq!(
            check("\\c:Circ(Qubit, Qubit). lift \\x:Qubit. apply(c, apply(c, x))", &[]),
            Ok(TypeExpr::lolli(TypeExpr::circ(q(), q()), TypeExpr::bang(TypeExpr::lolli(q(), q()))))
        );
    }

    #[test]
    fn parameter_weakening() {
        assert_eq!(
            check("\\f:!(Qubit -o Qubit). #0", &[0]),
            Ok(TypeExpr::lolli(TypeExpr::bang(TypeExpr::lolli(q(), q())), q()))
        );
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(check("force #0", &[0]), Err(TypeErrorKind::NotABang(_))));
        assert!(matches!(check("#0 #1", &[0, 1]), Err(TypeErrorKind::NotAFunction(_))));
        assert!(matches!(check("apply(#0, #1)", &[0, 1]), Err(TypeErrorKind::NotACirc(_))));
        assert!(matches!(check("let <a, b> = #0 in a", &[0]), Err(TypeErrorKind::NotATuple(_))));
        assert!(matches!(check("y", &[]), Err(TypeErrorKind::UnboundVar(_))));
        assert!(matches!(check("apply(gate CNOT, #0)", &[0]), Err(TypeErrorKind::Mismatch { .. })));
        assert!(matches!(
            check("box[Qubit -o Qubit](lift \\x:Qubit -o Qubit. x)", &[]),
            Err(TypeErrorKind::BoxShape(_))
        ));
        assert!(matches!(
            check("box[Qubit](lift \\x:Qubit. \\y:Qubit. x)", &[]),
            Err(TypeErrorKind::LinearUnused(_))
        ));
    }

    #[test]
    fn error_paths_point_at_subterms() {
        let t = parse("<#0, apply(gate CNOT, #1)>").unwrap();
        let e = typecheck(&TypingContext::with_labels(labels(&[0, 1])), &t).unwrap_err();
        assert_eq!(e.path, vec![1, 1]);
    }

    #[test]
    fn configurations() {
        let lam = parse("\\x:Qubit. x").unwrap();
        let empty = LabelContext::new();
        assert!(welltyped_config(&empty, &identity(&empty), &lam, &TypeExpr::lolli(q(), q()), &empty).is_ok());
        let c = identity(&labels(&[0]));
        assert!(welltyped_config(&labels(&[0]), &c, &Term::Lab(LabelId(0)), &q(), &empty).is_ok());
        let e = welltyped_config(&labels(&[0]), &c, &Term::Lab(LabelId(1)), &q(), &empty).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::FrontierMismatch(_)));
        assert!(welltyped_config(&labels(&[0]), &c, &lam, &TypeExpr::lolli(q(), q()), &labels(&[0])).is_ok());
    }
}
