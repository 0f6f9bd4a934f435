use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::LabelledCircuit;
use crate::types::TypeExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// `ℓ | <ℓ, k>`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelTuple {
    Leaf(LabelId),
    Pair(Box<LabelTuple>, Box<LabelTuple>),
}

impl LabelTuple {
    pub fn pair(a: LabelTuple, b: LabelTuple) -> Self {
        LabelTuple::Pair(Box::new(a), Box::new(b))
    }

    /// Right-nested tuple over `labels`; `None` when empty.
    pub fn right_nested(labels: &[LabelId]) -> Option<Self> {
        let (last, init) = labels.split_last()?;
        let mut acc = LabelTuple::Leaf(*last);
        for l in init.iter().rev() {
            acc = LabelTuple::pair(LabelTuple::Leaf(*l), acc);
        }
        Some(acc)
    }

    pub fn leaves(&self) -> Vec<LabelId> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<LabelId>) {
        match self {
            LabelTuple::Leaf(l) => out.push(*l),
            LabelTuple::Pair(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn has_duplicates(&self) -> bool {
        let leaves = self.leaves();
        let set: BTreeSet<_> = leaves.iter().collect();
        set.len() != leaves.len()
    }

    pub fn same_shape(&self, other: &LabelTuple) -> bool {
        match (self, other) {
            (LabelTuple::Leaf(_), LabelTuple::Leaf(_)) => true,
            (LabelTuple::Pair(a, b), LabelTuple::Pair(c, d)) => a.same_shape(c) && b.same_shape(d),
            _ => false,
        }
    }

    pub fn map(&self, f: &mut impl FnMut(LabelId) -> LabelId) -> LabelTuple {
        match self {
            LabelTuple::Leaf(l) => LabelTuple::Leaf(f(*l)),
            LabelTuple::Pair(a, b) => LabelTuple::pair(a.map(f), b.map(f)),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            LabelTuple::Leaf(l) => Term::Lab(*l),
            LabelTuple::Pair(a, b) => Term::pair(a.to_term(), b.to_term()),
        }
    }

    pub fn from_term(m: &Term) -> Option<LabelTuple> {
        match m {
            Term::Lab(l) => Some(LabelTuple::Leaf(*l)),
            Term::Pair(a, b) => Some(LabelTuple::pair(Self::from_term(a)?, Self::from_term(b)?)),
            _ => None,
        }
    }
}

impl fmt::Display for LabelTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelTuple::Leaf(l) => write!(f, "{l}"),
            LabelTuple::Pair(a, b) => write!(f, "<{a}, {b}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lab(LabelId),
    Abs(String, TypeExpr, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    LetPair(String, String, Box<Term>, Box<Term>),
    Lift(Box<Term>),
    Force(Box<Term>),
    BoxT(TypeExpr, Box<Term>),
    ApplyC(Box<Term>, Box<Term>),
    BoxedCirc(LabelTuple, Arc<LabelledCircuit>, LabelTuple),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn abs(x: impl Into<String>, ann: TypeExpr, body: Term) -> Term {
        Term::Abs(x.into(), ann, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn pair(l: Term, r: Term) -> Term {
        Term::Pair(Box::new(l), Box::new(r))
    }

    pub fn let_pair(x: impl Into<String>, y: impl Into<String>, bound: Term, body: Term) -> Term {
        Term::LetPair(x.into(), y.into(), Box::new(bound), Box::new(body))
    }

    pub fn lift(m: Term) -> Term {
        Term::Lift(Box::new(m))
    }

    pub fn force(m: Term) -> Term {
        Term::Force(Box::new(m))
    }

    pub fn box_t(t: TypeExpr, m: Term) -> Term {
        Term::BoxT(t, Box::new(m))
    }

    pub fn apply(c: Term, k: Term) -> Term {
        Term::ApplyC(Box::new(c), Box::new(k))
    }

    pub fn boxed(ins: LabelTuple, circ: LabelledCircuit, outs: LabelTuple) -> Term {
        Term::BoxedCirc(ins, Arc::new(circ), outs)
    }

    /// `V ::= ℓ | λx.M | <V, W> | lift M | (ℓ, C, ℓ')`
    pub fn is_value(&self) -> bool {
        match self {
            Term::Lab(_) | Term::Abs(..) | Term::Lift(_) | Term::BoxedCirc(..) => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    pub fn is_label_tuple(&self) -> bool {
        match self {
            Term::Lab(_) => true,
            Term::Pair(a, b) => a.is_label_tuple() && b.is_label_tuple(),
            _ => false,
        }
    }

    /// Immediate subterms in path order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Lab(_) | Term::BoxedCirc(..) => vec![],
            Term::Abs(_, _, b) | Term::Lift(b) | Term::Force(b) | Term::BoxT(_, b) => vec![b],
            Term::App(a, b) | Term::Pair(a, b) | Term::ApplyC(a, b) | Term::LetPair(_, _, a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn subterm(&self, path: &[u8]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i as usize)?;
        }
        Some(cur)
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Largest label occurring anywhere, including inside boxed literals.
    pub fn max_label(&self) -> Option<LabelId> {
        match self {
            Term::Lab(l) => Some(*l),
            Term::BoxedCirc(ins, c, outs) => ins
                .leaves()
                .into_iter()
                .chain(outs.leaves())
                .chain(c.max_label())
                .max(),
            _ => self.children().into_iter().filter_map(|c| c.max_label()).max(),
        }
    }

    pub fn contains(&self, pred: &impl Fn(&Term) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.contains(pred))
    }
}

pub fn free_labels(m: &Term) -> BTreeSet<LabelId> {
    let mut out = BTreeSet::new();
    collect_labels(m, &mut out);
    out
}

fn collect_labels(m: &Term, out: &mut BTreeSet<LabelId>) {
    match m {
        Term::Lab(l) => {
            out.insert(*l);
        }
        Term::BoxedCirc(..) => {}
        _ => {
            for c in m.children() {
                collect_labels(c, out);
            }
        }
    }
}

pub fn free_vars(m: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(m, &mut Vec::new(), &mut out);
    out
}

fn collect_free<'a>(m: &'a Term, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
    match m {
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        Term::Abs(x, _, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::LetPair(x, y, m1, body) => {
            collect_free(m1, bound, out);
            bound.push(x);
            bound.push(y);
            collect_free(body, bound, out);
            bound.truncate(bound.len() - 2);
        }
        _ => {
            for c in m.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub fn occurs_free(m: &Term, x: &str) -> bool {
    match m {
        Term::Var(y) => y == x,
        Term::Abs(y, _, body) => y != x && occurs_free(body, x),
        Term::LetPair(a, b, m1, body) => {
            occurs_free(m1, x) || (a != x && b != x && occurs_free(body, x))
        }
        _ => m.children().into_iter().any(|c| occurs_free(c, x)),
    }
}

/// Every identifier occurring in `m`, free or binding.
pub fn all_names(m: &Term, out: &mut HashSet<String>) {
    match m {
        Term::Var(x) | Term::Abs(x, _, _) => {
            out.insert(x.clone());
        }
        Term::LetPair(x, y, _, _) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        _ => {}
    }
    for c in m.children() {
        all_names(c, out);
    }
}

/// Smallest `base` + numeric suffix not in `avoid`.
pub fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded suffix space")
}

/// `m[v/x]`, renaming binders of `m` that would capture free variables of `v`.
pub fn substitute(m: &Term, v: &Term, x: &str) -> Term {
    let fv = free_vars(v);
    subst(m, v, x, &fv)
}

fn subst(m: &Term, v: &Term, x: &str, fv: &BTreeSet<String>) -> Term {
    if !occurs_free(m, x) {
        return m.clone();
    }
    match m {
        Term::Var(_) => v.clone(),
        Term::Lab(_) | Term::BoxedCirc(..) => m.clone(),
        Term::Abs(y, ann, body) => {
            if fv.contains(y) {
                let avoid = avoid_set(body, v, x, &[y]);
                let z = fresh_name(y, &avoid);
                let body = substitute(body, &Term::Var(z.clone()), y);
                Term::abs(z, ann.clone(), subst(&body, v, x, fv))
            } else {
                Term::abs(y.clone(), ann.clone(), subst(body, v, x, fv))
            }
        }
        Term::LetPair(a, b, m1, body) => {
            let m1 = subst(m1, v, x, fv);
            if a == x || b == x {
                return Term::let_pair(a.clone(), b.clone(), m1, (**body).clone());
            }
            let mut body = (**body).clone();
            let mut names = [a.clone(), b.clone()];
            for i in 0..2 {
                if fv.contains(&names[i]) {
                    let others: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                    let avoid = avoid_set(&body, v, x, &others);
                    let z = fresh_name(&names[i], &avoid);
                    body = substitute(&body, &Term::Var(z.clone()), &names[i]);
                    names[i] = z;
                }
            }
            let [a, b] = names;
            Term::let_pair(a, b, m1, subst(&body, v, x, fv))
        }
        Term::App(f, a) => Term::app(subst(f, v, x, fv), subst(a, v, x, fv)),
        Term::Pair(l, r) => Term::pair(subst(l, v, x, fv), subst(r, v, x, fv)),
        Term::ApplyC(c, k) => Term::apply(subst(c, v, x, fv), subst(k, v, x, fv)),
        Term::Lift(b) => Term::lift(subst(b, v, x, fv)),
        Term::Force(b) => Term::force(subst(b, v, x, fv)),
        Term::BoxT(t, b) => Term::box_t(t.clone(), subst(b, v, x, fv)),
    }
}

fn avoid_set(body: &Term, v: &Term, x: &str, extra: &[&str]) -> HashSet<String> {
    let mut avoid = HashSet::new();
    all_names(body, &mut avoid);
    all_names(v, &mut avoid);
    avoid.insert(x.to_string());
    avoid.extend(extra.iter().map(|s| s.to_string()));
    avoid
}

/// Alpha-equivalence with caller-supplied comparison of labels and boxed literals.
pub fn alpha_eq_by(
    a: &Term,
    b: &Term,
    labels: &mut dyn FnMut(LabelId, LabelId) -> bool,
    boxes: &mut dyn FnMut(&Term, &Term) -> bool,
) -> bool {
    let mut env = Vec::new();
    alpha(a, b, &mut env, labels, boxes)
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_eq_by(a, b, &mut |x, y| x == y, &mut |x, y| x == y)
}

fn alpha(
    a: &Term,
    b: &Term,
    env: &mut Vec<(String, String)>,
    labels: &mut dyn FnMut(LabelId, LabelId) -> bool,
    boxes: &mut dyn FnMut(&Term, &Term) -> bool,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            match env.iter().rev().find(|(l, r)| l == x || r == y) {
                Some((l, r)) => l == x && r == y,
                None => x == y,
            }
        }
        (Term::Lab(x), Term::Lab(y)) => labels(*x, *y),
        (Term::BoxedCirc(..), Term::BoxedCirc(..)) => boxes(a, b),
        (Term::Abs(x, s, m), Term::Abs(y, t, n)) => {
            if s != t {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let ok = alpha(m, n, env, labels, boxes);
            env.pop();
            ok
        }
        (Term::LetPair(x1, y1, m1, n1), Term::LetPair(x2, y2, m2, n2)) => {
            if !alpha(m1, m2, env, labels, boxes) {
                return false;
            }
            env.push((x1.clone(), x2.clone()));
            env.push((y1.clone(), y2.clone()));
            let ok = alpha(n1, n2, env, labels, boxes);
            env.truncate(env.len() - 2);
            ok
        }
        (Term::App(m1, n1), Term::App(m2, n2))
        | (Term::Pair(m1, n1), Term::Pair(m2, n2))
        | (Term::ApplyC(m1, n1), Term::ApplyC(m2, n2)) => {
            alpha(m1, m2, env, labels, boxes) && alpha(n1, n2, env, labels, boxes)
        }
        (Term::Lift(m), Term::Lift(n)) | (Term::Force(m), Term::Force(n)) => {
            alpha(m, n, env, labels, boxes)
        }
        (Term::BoxT(s, m), Term::BoxT(t, n)) => s == t && alpha(m, n, env, labels, boxes),
        _ => false,
    }
}
