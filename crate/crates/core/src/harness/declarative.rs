//! Declarative typing by brute force over context splits, and an exhaustive
//! enumerator of small terms to compare it against the algorithmic checker.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::circuit::{GateSignature, LabelContext};
use crate::syntax::{LabelId, Term};
use crate::typecheck::{boxed_type, typecheck, TypingContext};
use crate::types::{TypeExpr, WireType};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Key {
    Var(String),
    Lab(LabelId),
}

type Linear = Vec<(Key, TypeExpr)>;

fn splits(g: &Linear) -> impl Iterator<Item = (Linear, Linear)> + '_ {
    (0u32..(1 << g.len())).map(move |mask| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, e) in g.iter().enumerate() {
            if mask & (1 << i) != 0 {
                a.push(e.clone());
            } else {
                b.push(e.clone());
            }
        }
        (a, b)
    })
}

fn extend(phi: &BTreeMap<String, TypeExpr>, g: &Linear, x: &str, t: &TypeExpr) -> (BTreeMap<String, TypeExpr>, Linear) {
    let mut phi = phi.clone();
    let mut g: Linear = g.iter().filter(|(k, _)| *k != Key::Var(x.to_string())).cloned().collect();
    phi.remove(x);
    if t.is_parameter() {
        phi.insert(x.to_string(), t.clone());
    } else {
        g.push((Key::Var(x.to_string()), t.clone()));
    }
    (phi, g)
}

/// `Φ; Γ ⊢ m : A` read off the rules directly; binary rules try every split of `Γ`.
fn derive(phi: &BTreeMap<String, TypeExpr>, g: &Linear, m: &Term) -> Option<TypeExpr> {
    match m {
        Term::Var(x) => match g.as_slice() {
            [(Key::Var(y), t)] if y == x => Some(t.clone()),
            [] => phi.get(x).cloned(),
            _ => None,
        },
        Term::Lab(l) => match g.as_slice() {
            [(Key::Lab(k), t)] if k == l => Some(t.clone()),
            _ => None,
        },
        Term::Abs(x, a, body) => {
            let (phi2, g2) = extend(phi, g, x, a);
            Some(TypeExpr::lolli(a.clone(), derive(&phi2, &g2, body)?))
        }
        Term::App(f, a) => splits(g).find_map(|(g1, g2)| match derive(phi, &g1, f)? {
            TypeExpr::Lolli(dom, cod) if derive(phi, &g2, a).as_ref() == Some(&*dom) => Some(*cod),
            _ => None,
        }),
        Term::Pair(l, r) => {
            splits(g).find_map(|(g1, g2)| Some(TypeExpr::tensor(derive(phi, &g1, l)?, derive(phi, &g2, r)?)))
        }
        Term::LetPair(x, y, bound, body) => {
            if x == y {
                return None;
            }
            splits(g).find_map(|(g1, g2)| {
                let TypeExpr::Tensor(a, b) = derive(phi, &g1, bound)? else { return None };
                let (phi2, g2) = extend(phi, &g2, x, &a);
                let (phi3, g3) = extend(&phi2, &g2, y, &b);
                derive(&phi3, &g3, body)
            })
        }
        Term::Lift(body) if g.is_empty() => Some(TypeExpr::bang(derive(phi, g, body)?)),
        Term::Lift(_) => None,
        Term::Force(body) => match derive(phi, g, body)? {
            TypeExpr::Bang(a) => Some(*a),
            _ => None,
        },
        Term::BoxT(t, body) => {
            if !t.is_simple_m_type() {
                return None;
            }
            let TypeExpr::Bang(inner) = derive(phi, g, body)? else { return None };
            match *inner {
                TypeExpr::Lolli(dom, cod) if *dom == *t && cod.is_simple_m_type() => Some(TypeExpr::circ(*dom, *cod)),
                _ => None,
            }
        }
        Term::ApplyC(c, k) => splits(g).find_map(|(g1, g2)| match derive(phi, &g1, c)? {
            TypeExpr::Circ(t, u) if derive(phi, &g2, k).as_ref() == Some(&*t) => Some(*u),
            _ => None,
        }),
        Term::BoxedCirc(ins, c, outs) if g.is_empty() => boxed_type(ins, c, outs).ok(),
        Term::BoxedCirc(..) => None,
    }
}

/// Declarative judgement for a closed term over label context `q`.
pub fn declarative_type(q: &LabelContext, m: &Term) -> Option<TypeExpr> {
    let g: Linear = q.iter().map(|(l, w)| (Key::Lab(l), TypeExpr::Wire(w.clone()))).collect();
    derive(&BTreeMap::new(), &g, m)
}

/// Building blocks for enumeration.
#[derive(Clone, Debug)]
pub struct Alphabet {
    pub annotations: Vec<TypeExpr>,
    pub box_types: Vec<TypeExpr>,
    pub labels: Vec<LabelId>,
    pub gates: Vec<Term>,
}

impl Alphabet {
    pub fn full() -> Self {
        let q = TypeExpr::qubit;
        let sig = GateSignature::default_signature();
        Alphabet {
            annotations: vec![
                q(),
                TypeExpr::bit(),
                TypeExpr::tensor(q(), q()),
                TypeExpr::lolli(q(), q()),
                TypeExpr::bang(TypeExpr::lolli(q(), q())),
                TypeExpr::circ(q(), q()),
            ],
            box_types: vec![q(), TypeExpr::tensor(q(), q())],
            labels: vec![LabelId(0), LabelId(1)],
            gates: ["H", "CNOT", "Meas"].iter().map(|g| sig.gate_literal(g, LabelId(2)).expect("default gate").0).collect(),
        }
    }

    pub fn small() -> Self {
        let q = TypeExpr::qubit;
        let sig = GateSignature::default_signature();
        Alphabet {
            annotations: vec![q(), TypeExpr::lolli(q(), q()), TypeExpr::bang(TypeExpr::lolli(q(), q()))],
            box_types: vec![q()],
            labels: vec![LabelId(0), LabelId(1)],
            gates: vec![sig.gate_literal("H", LabelId(2)).expect("default gate").0],
        }
    }
}

fn var_name(i: usize) -> String {
    format!("x{i}")
}

/// All terms of depth at most `d` and size exactly `s` with free variables among
/// `x0 .. x{k-1}`; binders never shadow.
pub struct Enumerator {
    alpha: Alphabet,
    memo: HashMap<(usize, usize, usize), Vec<Term>>,
}

impl Enumerator {
    pub fn new(alpha: Alphabet) -> Self {
        Enumerator { alpha, memo: HashMap::new() }
    }

    fn get(&mut self, d: usize, s: usize, k: usize) -> Vec<Term> {
        if let Some(v) = self.memo.get(&(d, s, k)) {
            return v.clone();
        }
        let mut out = Vec::new();
        self.each(d, s, k, &mut |t| out.push(t));
        self.memo.insert((d, s, k), out.clone());
        out
    }

    pub fn each(&mut self, d: usize, s: usize, k: usize, f: &mut dyn FnMut(Term)) {
        if d == 0 || s == 0 {
            return;
        }
        if s == 1 {
            (0..k).for_each(|i| f(Term::var(var_name(i))));
            self.alpha.labels.iter().for_each(|l| f(Term::Lab(*l)));
            self.alpha.gates.iter().for_each(|g| f(g.clone()));
            return;
        }
        for a in self.alpha.annotations.clone() {
            for b in self.get(d - 1, s - 1, k + 1) {
                f(Term::abs(var_name(k), a.clone(), b));
            }
        }
        for b in self.get(d - 1, s - 1, k) {
            f(Term::lift(b.clone()));
            f(Term::force(b.clone()));
            for t in &self.alpha.box_types {
                f(Term::box_t(t.clone(), b.clone()));
            }
        }
        for i in 1..s - 1 {
            let left = self.get(d - 1, i, k);
            if left.is_empty() {
                continue;
            }
            let right = self.get(d - 1, s - 1 - i, k);
            for l in &left {
                for r in &right {
                    f(Term::app(l.clone(), r.clone()));
                    f(Term::pair(l.clone(), r.clone()));
                    f(Term::apply(l.clone(), r.clone()));
                }
            }
            let body = self.get(d - 1, s - 1 - i, k + 2);
            for l in &left {
                for r in &body {
                    f(Term::let_pair(var_name(k), var_name(k + 1), l.clone(), r.clone()));
                }
            }
        }
    }
}

/// Label contexts over at most two labels.
pub fn small_label_contexts() -> Vec<LabelContext> {
    let q = WireType::qubit;
    let b = WireType::bit;
    let mk = |es: &[(u32, WireType)]| es.iter().map(|(l, w)| (LabelId(*l), w.clone())).collect::<LabelContext>();
    vec![
        mk(&[]),
        mk(&[(0, q())]),
        mk(&[(1, q())]),
        mk(&[(0, b())]),
        mk(&[(0, q()), (1, q())]),
        mk(&[(0, q()), (1, b())]),
    ]
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingComparison {
    pub terms: u64,
    pub judgements: u64,
    pub typable: u64,
    pub disagreements: Vec<String>,
}

impl TypingComparison {
    fn merge(mut self, o: TypingComparison) -> TypingComparison {
        self.terms += o.terms;
        self.judgements += o.judgements;
        self.typable += o.typable;
        self.disagreements.extend(o.disagreements);
        self.disagreements.truncate(20);
        self
    }
}

pub fn compare_on(terms: &[Term], contexts: &[LabelContext]) -> TypingComparison {
    terms
        .par_iter()
        .map(|m| {
            let mut r = TypingComparison { terms: 1, ..Default::default() };
            for q in contexts {
                let alg = typecheck(&TypingContext::with_labels(q.clone()), m).ok();
                let dec = declarative_type(q, m);
                r.judgements += 1;
                if alg.is_some() {
                    r.typable += 1;
                }
                if alg != dec {
                    r.disagreements.push(format!("{q} ⊢ {m}: algorithmic {alg:?}, declarative {dec:?}"));
                }
            }
            r
        })
        .reduce(TypingComparison::default, TypingComparison::merge)
}

/// Every term of depth ≤ `d` and size ≤ `max_size`, checked in batches.
pub fn compare_exhaustive(alpha: Alphabet, d: usize, max_size: usize, contexts: &[LabelContext]) -> TypingComparison {
    let mut en = Enumerator::new(alpha);
    let mut total = TypingComparison::default();
    let mut batch = Vec::new();
    for s in 1..=max_size {
        en.each(d, s, 0, &mut |t| {
            batch.push(t);
            if batch.len() >= 50_000 {
                total = std::mem::take(&mut total).merge(compare_on(&batch, contexts));
                batch.clear();
            }
        });
    }
    total.merge(compare_on(&batch, contexts))
}
