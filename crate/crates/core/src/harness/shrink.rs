//! Greedy shrinking of failing programs, preserving the program's type.

use crate::harness::Program;
use crate::syntax::{substitute, Term};
use crate::typecheck::{typecheck, TypingContext};

fn with_child(m: &Term, i: u8, f: &dyn Fn(&Term) -> Term) -> Term {
    let b = |t: &Term| Box::new(f(t));
    match (m, i) {
        (Term::Abs(x, a, body), 0) => Term::Abs(x.clone(), a.clone(), b(body)),
        (Term::Lift(body), 0) => Term::Lift(b(body)),
        (Term::Force(body), 0) => Term::Force(b(body)),
        (Term::BoxT(t, body), 0) => Term::BoxT(t.clone(), b(body)),
        (Term::App(l, r), 0) => Term::App(b(l), r.clone()),
        (Term::App(l, r), 1) => Term::App(l.clone(), b(r)),
        (Term::Pair(l, r), 0) => Term::Pair(b(l), r.clone()),
        (Term::Pair(l, r), 1) => Term::Pair(l.clone(), b(r)),
        (Term::ApplyC(l, r), 0) => Term::ApplyC(b(l), r.clone()),
        (Term::ApplyC(l, r), 1) => Term::ApplyC(l.clone(), b(r)),
        (Term::LetPair(x, y, l, r), 0) => Term::LetPair(x.clone(), y.clone(), b(l), r.clone()),
        (Term::LetPair(x, y, l, r), 1) => Term::LetPair(x.clone(), y.clone(), l.clone(), b(r)),
        _ => m.clone(),
    }
}

/// `m` with the subterm at `path` replaced by `new`.
pub fn replace_at(m: &Term, path: &[u8], new: &Term) -> Term {
    match path.split_first() {
        None => new.clone(),
        Some((&i, rest)) => with_child(m, i, &|c| replace_at(c, rest, new)),
    }
}

fn paths(m: &Term, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    out.push(prefix.clone());
    for (i, c) in m.children().into_iter().enumerate() {
        prefix.push(i as u8);
        paths(c, prefix, out);
        prefix.pop();
    }
}

fn descendants<'a>(m: &'a Term, out: &mut Vec<&'a Term>) {
    for c in m.children() {
        out.push(c);
        descendants(c, out);
    }
}

fn contract(m: &Term) -> Option<Term> {
    match m {
        Term::App(f, v) => match &**f {
            Term::Abs(x, _, body) if v.is_value() => Some(substitute(body, v, x)),
            _ => None,
        },
        Term::LetPair(x, y, bound, body) => match &**bound {
            Term::Pair(v, w) if v.is_value() && w.is_value() => Some(substitute(&substitute(body, v, x), w, y)),
            _ => None,
        },
        Term::Force(inner) => match &**inner {
            Term::Lift(n) => Some((**n).clone()),
            _ => None,
        },
        _ => None,
    }
}

/// Smaller variants of `m`, smallest first.
pub fn candidates(m: &Term) -> Vec<Term> {
    let mut ps = Vec::new();
    paths(m, &mut Vec::new(), &mut ps);
    let mut out = Vec::new();
    for p in &ps {
        let node = m.subterm(p).expect("path from traversal");
        let mut ds = Vec::new();
        descendants(node, &mut ds);
        for d in ds {
            out.push(replace_at(m, p, d));
        }
        if let Some(r) = contract(node) {
            out.push(replace_at(m, p, &r));
        }
    }
    out.sort_by_key(Term::size);
    out.dedup();
    out
}

/// Greedily shrinks `p` while it keeps its type and `failing` keeps holding.
pub fn shrink(p: &Program, failing: &dyn Fn(&Program) -> bool) -> Program {
    if !failing(p) {
        return p.clone();
    }
    let ctx = TypingContext::with_labels(p.labels.clone());
    let mut cur = p.clone();
    'outer: loop {
        let size = cur.term.size();
        for cand in candidates(&cur.term) {
            if cand.size() >= size {
                continue;
            }
            if typecheck(&ctx, &cand).as_ref() != Ok(&cur.ty) {
                continue;
            }
            let next = Program { labels: cur.labels.clone(), term: cand, ty: cur.ty.clone() };
            if failing(&next) {
                cur = next;
                continue 'outer;
            }
        }
        return cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::LabelContext;
    use crate::syntax::{parse_program, LabelId};
    use crate::types::{TypeExpr, WireType};

    fn prog(src: &str) -> Program {
        let sig = crate::circuit::GateSignature::default_signature();
        let parsed = parse_program(src, &sig).unwrap();
        let labels = parsed.inputs.unwrap_or_default();
        let ty = typecheck(&TypingContext::with_labels(labels.clone()), &parsed.term).unwrap();
        Program { labels, term: parsed.term, ty }
    }

    #[test]
    fn atomic_label_is_fixed_point() {
        let mut q = LabelContext::new();
        q.insert(LabelId(0), WireType::qubit());
        let p = Program { labels: q, term: Term::Lab(LabelId(0)), ty: TypeExpr::qubit() };
        assert_eq!(shrink(&p, &|_| true), p);
    }

    #[test]
    fn passing_input_is_returned() {
        let p = prog("-- inputs: #0:Qubit\n(\\x:Qubit. apply(gate H, x)) #0");
        assert_eq!(shrink(&p, &|_| false), p);
    }

    #[test]
    fn shrinks_to_the_apply() {
        let p = prog("-- inputs: #0:Qubit\n(\\x:Qubit. (\\y:Qubit. apply(gate H, y)) x) #0");
        let has_apply = |q: &Program| q.term.contains(&|t| matches!(t, Term::ApplyC(..)));
        let s = shrink(&p, &has_apply);
        assert_eq!(s.term.to_string(), "apply(gate H, #0)");
    }
}
