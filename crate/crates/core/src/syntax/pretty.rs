use std::fmt::Write as _;

use crate::circuit::LabelledCircuit;
use crate::syntax::term::{LabelTuple, Term};

/// Concrete syntax accepted by `parse`, with minimal parentheses.
pub fn pretty(m: &Term) -> String {
    let mut out = String::new();
    write_term(m, 0, &mut out);
    out
}

// 0: anywhere, 1: function position, 2: argument position
fn write_term(m: &Term, prec: u8, out: &mut String) {
    let open = |needs: bool, out: &mut String| {
        if needs {
            out.push('(');
        }
    };
    let close = |needs: bool, out: &mut String| {
        if needs {
            out.push(')');
        }
    };
    match m {
        Term::Var(x) => out.push_str(x),
        Term::Lab(l) => {
            let _ = write!(out, "{l}");
        }
        Term::Pair(a, b) => {
            out.push('<');
            write_term(a, 0, out);
            out.push_str(", ");
            write_term(b, 0, out);
            out.push('>');
        }
        Term::ApplyC(c, k) => {
            out.push_str("apply(");
            write_term(c, 0, out);
            out.push_str(", ");
            write_term(k, 0, out);
            out.push(')');
        }
        Term::BoxedCirc(ins, c, outs) => write_boxed(ins, c, outs, out),
        Term::App(f, a) => {
            let needs = prec > 1;
            open(needs, out);
            write_term(f, 1, out);
            out.push(' ');
            write_term(a, 2, out);
            close(needs, out);
        }
        Term::Abs(x, ann, body) => {
            let needs = prec > 0;
            open(needs, out);
            let _ = write!(out, "\\{x}:{ann}. ");
            write_term(body, 0, out);
            close(needs, out);
        }
        Term::LetPair(x, y, m1, body) => {
            let needs = prec > 0;
            open(needs, out);
            let _ = write!(out, "let <{x}, {y}> = ");
            write_term(m1, 0, out);
            out.push_str(" in ");
            write_term(body, 0, out);
            close(needs, out);
        }
        Term::Lift(b) | Term::Force(b) | Term::BoxT(_, b) => {
            let needs = prec > 0;
            open(needs, out);
            match m {
                Term::Lift(_) => out.push_str("lift "),
                Term::Force(_) => out.push_str("force "),
                Term::BoxT(t, _) => {
                    let _ = write!(out, "box[{t}] ");
                }
                _ => unreachable!(),
            }
            write_term(b, 0, out);
            close(needs, out);
        }
    }
}

/// Name of the gate when `(ins, c, outs)` has exactly the shape produced by `gate NAME`.
pub fn gate_sugar_name<'a>(ins: &LabelTuple, c: &'a LabelledCircuit, outs: &LabelTuple) -> Option<&'a str> {
    let [g] = c.gates.as_slice() else { return None };
    let shaped = |t: &LabelTuple, ls: &[crate::syntax::LabelId]| LabelTuple::right_nested(ls).as_ref() == Some(t);
    let frontier_ok = c.inputs.labels().eq(sorted(&g.ins)) && c.outputs.labels().eq(sorted(&g.outs));
    let monotone = g.ins.windows(2).all(|w| w[0] < w[1])
        && g.outs.windows(2).all(|w| w[0] < w[1])
        && g.ins.last().zip(g.outs.first()).is_none_or(|(a, b)| a < b);
    (shaped(ins, &g.ins) && shaped(outs, &g.outs) && frontier_ok && monotone).then_some(g.name.as_str())
}

fn sorted(ls: &[crate::syntax::LabelId]) -> Vec<crate::syntax::LabelId> {
    let mut v = ls.to_vec();
    v.sort();
    v
}

fn write_boxed(ins: &LabelTuple, c: &LabelledCircuit, outs: &LabelTuple, out: &mut String) {
    if let Some(name) = gate_sugar_name(ins, c, outs) {
        let _ = write!(out, "gate {name}");
        return;
    }
    out.push_str("circ(");
    write_typed_tuple(ins, &c.inputs, out);
    out.push_str(" | ");
    for (i, g) in c.gates.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&g.name);
        for l in &g.ins {
            let _ = write!(out, " {l}");
        }
        out.push_str(" ->");
        for l in &g.outs {
            let _ = write!(out, " {l}");
        }
    }
    if !c.gates.is_empty() {
        out.push(' ');
    }
    out.push_str("| ");
    write_typed_tuple(outs, &c.outputs, out);
    out.push(')');
}

fn write_typed_tuple(t: &LabelTuple, ctx: &crate::circuit::LabelContext, out: &mut String) {
    match t {
        LabelTuple::Leaf(l) => {
            let w = ctx.get(*l).map_or("?", |w| w.as_str());
            let _ = write!(out, "{l}:{w}");
        }
        LabelTuple::Pair(a, b) => {
            out.push('<');
            write_typed_tuple(a, ctx, out);
            out.push_str(", ");
            write_typed_tuple(b, ctx, out);
            out.push('>');
        }
    }
}
