//! Type-directed generation of well-typed closed programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{GateSignature, LabelContext};
use crate::syntax::{gate_sugar_name, LabelId, Term};
use crate::typecheck::{typecheck, TypingContext};
use crate::types::{TypeExpr, WireType};

/// Relative production weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub assemble: f64,
    pub apply: f64,
    pub app_lambda: f64,
    pub let_pair: f64,
    pub pair: f64,
    pub param_intro: f64,
    pub param_use: f64,
    pub gate: f64,
    pub box_: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            assemble: 1.0,
            apply: 3.0,
            app_lambda: 2.0,
            let_pair: 1.5,
            pair: 1.0,
            param_intro: 1.5,
            param_use: 2.0,
            gate: 2.0,
            box_: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub max_depth: usize,
    pub label_budget: usize,
    pub seed: u64,
    pub gate_whitelist: Vec<String>,
    pub weights: Weights,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_depth: 6,
            label_budget: 3,
            seed: 0,
            gate_whitelist: ["H", "X", "CNOT", "Meas"].map(String::from).to_vec(),
            weights: Weights::default(),
        }
    }
}

/// A closed program: label context, term and the type it checks at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub labels: LabelContext,
    pub term: Term,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("generator gave up: {0}")]
pub struct GiveUp(pub String);

#[derive(Clone, Debug)]
struct Res {
    term: Term,
    ty: TypeExpr,
}

struct GateShape {
    name: String,
    ins: TypeExpr,
    outs: TypeExpr,
}

pub struct Generator {
    params: GenParams,
    sig: GateSignature,
    rng: ChaCha8Rng,
    gates: Vec<GateShape>,
    meas: bool,
    names: u32,
    params_env: Vec<(String, TypeExpr)>,
}

fn tuple_type(ws: &[WireType]) -> Option<TypeExpr> {
    let (last, init) = ws.split_last()?;
    Some(init.iter().rev().fold(TypeExpr::Wire(last.clone()), |acc, w| TypeExpr::tensor(TypeExpr::Wire(w.clone()), acc)))
}

fn counts(tys: &[&TypeExpr]) -> (usize, usize) {
    let mut leaves = 0;
    let mut bits = 0;
    for t in tys {
        for w in t.wire_leaves() {
            leaves += 1;
            if w == WireType::bit() {
                bits += 1;
            }
        }
    }
    (leaves, bits)
}

fn tensor_nodes(t: &TypeExpr) -> usize {
    match t {
        TypeExpr::Tensor(a, b) => 1 + tensor_nodes(a) + tensor_nodes(b),
        _ => 0,
    }
}

fn tree_depth(t: &TypeExpr) -> usize {
    match t {
        TypeExpr::Tensor(a, b) => 1 + tree_depth(a).max(tree_depth(b)),
        _ => 1,
    }
}

impl Generator {
    pub fn new(params: GenParams) -> Self {
        let sig = GateSignature::default_signature();
        let gates = params
            .gate_whitelist
            .iter()
            .filter_map(|name| {
                let g = sig.gate(name)?;
                Some(GateShape { name: name.clone(), ins: tuple_type(&g.ins)?, outs: tuple_type(&g.outs)? })
            })
            .collect();
        let meas = params.gate_whitelist.iter().any(|g| g == "Meas");
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Generator { params, sig, rng, gates, meas, names: 0, params_env: Vec::new() }
    }

    pub fn signature(&self) -> &GateSignature {
        &self.sig
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.names += 1;
        format!("{prefix}{}", self.names)
    }

    fn fits(&self, res: &[&TypeExpr], t: &TypeExpr) -> bool {
        let (rl, rb) = counts(res);
        let (tl, tb) = counts(&[t]);
        rl == tl && rb <= tb && (rb == tb || self.meas)
    }

    fn min_depth(res: &[&TypeExpr], t: &TypeExpr) -> usize {
        let lets: usize = res.iter().map(|r| tensor_nodes(r)).sum();
        let (_, rb) = counts(res);
        let (_, tb) = counts(&[t]);
        lets + tree_depth(t) + usize::from(tb > rb)
    }

    fn tys(res: &[Res]) -> Vec<&TypeExpr> {
        res.iter().map(|r| &r.ty).collect()
    }

    /// Random tensor tree with `leaves` leaves, `bits` of them `Bit`.
    fn random_simple(&mut self, leaves: usize, bits: usize) -> TypeExpr {
        let mut ws: Vec<WireType> = (0..leaves).map(|i| if i < bits { WireType::bit() } else { WireType::qubit() }).collect();
        ws.shuffle(&mut self.rng);
        self.random_tree(&ws)
    }

    fn random_tree(&mut self, ws: &[WireType]) -> TypeExpr {
        if ws.len() == 1 {
            return TypeExpr::Wire(ws[0].clone());
        }
        let cut = self.rng.gen_range(1..ws.len());
        let a = self.random_tree(&ws[..cut]);
        let b = self.random_tree(&ws[cut..]);
        TypeExpr::tensor(a, b)
    }

    fn gate_term(&self, name: &str) -> Term {
        self.sig.gate_literal(name, LabelId(0)).expect("whitelisted gate").0
    }

    fn pick<T>(&mut self, options: Vec<(f64, T)>) -> Option<T> {
        let total: f64 = options.iter().map(|(w, _)| *w).sum();
        if options.is_empty() || total <= 0.0 {
            return None;
        }
        let mut x = self.rng.gen_range(0.0..total);
        let n = options.len();
        for (i, (w, v)) in options.into_iter().enumerate() {
            if x < w || i == n - 1 {
                return Some(v);
            }
            x -= w;
        }
        None
    }

    /// Consumes all of `res` to build a term of simple type `t` within depth `d`.
    fn gen(&mut self, t: &TypeExpr, res: Vec<Res>, d: usize) -> Term {
        let need = Self::min_depth(&Self::tys(&res), t);
        debug_assert!(self.fits(&Self::tys(&res), t));
        if d <= need {
            return self.assemble(t, res);
        }
        #[derive(Clone, Copy)]
        enum P {
            Assemble,
            Apply,
            AppLambda,
            Let,
            Pair,
            ParamIntro,
            ParamUse,
        }
        let w = self.params.weights.clone();
        let mut options = vec![
            (w.assemble, P::Assemble),
            (w.apply, P::Apply),
            (w.app_lambda, P::AppLambda),
            (w.let_pair, P::Let),
            (w.param_intro, P::ParamIntro),
        ];
        if matches!(t, TypeExpr::Tensor(..)) {
            options.push((w.pair, P::Pair));
        }
        if self.params_env.iter().any(|(_, p)| matches!(p, TypeExpr::Bang(_) | TypeExpr::Circ(..))) {
            options.push((w.param_use, P::ParamUse));
        }
        for _ in 0..4 {
            let Some(choice) = self.pick(options.clone()) else { break };
            let r = match choice {
                P::Assemble => None,
                P::Apply => self.p_apply(t, &res, d),
                P::AppLambda => self.p_app_lambda(t, &res, d),
                P::Let => self.p_let(t, &res, d),
                P::Pair => self.p_pair(t, &res, d),
                P::ParamIntro => self.p_param_intro(t, &res, d),
                P::ParamUse => self.p_param_use(t, &res, d),
            };
            if let Some(m) = r {
                return m;
            }
            if matches!(choice, P::Assemble) {
                break;
            }
        }
        self.assemble(t, res)
    }

    fn assemble(&mut self, t: &TypeExpr, mut res: Vec<Res>) -> Term {
        if let Some(i) = res.iter().position(|r| matches!(r.ty, TypeExpr::Tensor(..))) {
            let r = res.remove(i);
            let TypeExpr::Tensor(a, b) = r.ty else { unreachable!() };
            let x = self.fresh("x");
            let y = self.fresh("y");
            res.push(Res { term: Term::var(x.clone()), ty: *a });
            res.push(Res { term: Term::var(y.clone()), ty: *b });
            res.shuffle(&mut self.rng);
            let body = self.assemble(t, res);
            return Term::let_pair(x, y, r.term, body);
        }
        let (mut bits, mut qubits): (Vec<Res>, Vec<Res>) =
            res.into_iter().partition(|r| r.ty == TypeExpr::bit());
        bits.shuffle(&mut self.rng);
        qubits.shuffle(&mut self.rng);
        let bit_leaves = counts(&[t]).1;
        let mut take_bit: Vec<bool> = (0..bit_leaves).map(|i| i < bits.len()).collect();
        take_bit.shuffle(&mut self.rng);
        self.fill(t, &mut bits, &mut qubits, &mut take_bit)
    }

    fn fill(&mut self, t: &TypeExpr, bits: &mut Vec<Res>, qubits: &mut Vec<Res>, take_bit: &mut Vec<bool>) -> Term {
        match t {
            TypeExpr::Tensor(a, b) => {
                let a = self.fill(a, bits, qubits, take_bit);
                let b = self.fill(b, bits, qubits, take_bit);
                Term::pair(a, b)
            }
            TypeExpr::Wire(w) if *w == WireType::bit() => {
                if take_bit.pop().expect("bit leaf") {
                    bits.pop().expect("bit resource").term
                } else {
                    let q = qubits.pop().expect("qubit resource").term;
                    Term::apply(self.gate_term("Meas"), q)
                }
            }
            _ => qubits.pop().expect("qubit resource").term,
        }
    }

    fn split_random(&mut self, res: &[Res]) -> (Vec<Res>, Vec<Res>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for r in res {
            if self.rng.gen_bool(0.5) {
                a.push(r.clone());
            } else {
                b.push(r.clone());
            }
        }
        (a, b)
    }

    fn p_apply(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        let tys = Self::tys(res);
        let mut options: Vec<(f64, Option<usize>)> = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if g.outs == *t && self.fits(&tys, &g.ins) && Self::min_depth(&tys, &g.ins) < d {
                options.push((self.params.weights.gate, Some(i)));
            }
        }
        options.push((self.params.weights.box_, None));
        match self.pick(options)? {
            Some(i) => {
                let ins = self.gates[i].ins.clone();
                let c = self.gate_term(&self.gates[i].name.clone());
                let arg = self.gen(&ins, res.to_vec(), d - 1);
                Some(Term::apply(c, arg))
            }
            None => {
                let (tl, tb) = counts(&[t]);
                let (_, rb) = counts(&tys);
                let bits = if self.meas { self.rng.gen_range(rb..=tb) } else { rb };
                let a = self.random_simple(tl, bits);
                if Self::min_depth(&tys, &a) >= d {
                    return None;
                }
                let c = self.gen_circ(&a, t, d - 1)?;
                let arg = self.gen(&a, res.to_vec(), d - 1);
                Some(Term::apply(c, arg))
            }
        }
    }

    fn p_app_lambda(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        let (r1, r2) = self.split_random(res);
        if r2.is_empty() {
            return None;
        }
        let (l2, b2) = counts(&Self::tys(&r2));
        let (_, b1) = counts(&Self::tys(&r1));
        let (_, tb) = counts(&[t]);
        if b1 + b2 > tb {
            return None;
        }
        let bits = if self.meas { self.rng.gen_range(b2..=tb - b1).min(l2) } else { b2 };
        let a = self.random_simple(l2, bits);
        let mut body_tys = Self::tys(&r1);
        body_tys.push(&a);
        if !self.fits(&body_tys, t) || Self::min_depth(&body_tys, t) + 2 > d || Self::min_depth(&Self::tys(&r2), &a) >= d
        {
            return None;
        }
        let x = self.fresh("q");
        let mut body_res = r1;
        body_res.push(Res { term: Term::var(x.clone()), ty: a.clone() });
        let body = self.gen(t, body_res, d - 2);
        let arg = self.gen(&a, r2, d - 1);
        let lam = Term::abs(x, a, body);
        if self.rng.gen_bool(0.25) && lam.depth() + 2 < d && free_linear_vars_absent(&lam, res) {
            return Some(Term::app(Term::force(Term::lift(lam)), arg));
        }
        Some(Term::app(lam, arg))
    }

    fn p_let(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        let (r1, r2) = self.split_random(res);
        let (l2, b2) = counts(&Self::tys(&r2));
        if l2 < 2 {
            return None;
        }
        let (_, b1) = counts(&Self::tys(&r1));
        let (_, tb) = counts(&[t]);
        if b1 + b2 > tb {
            return None;
        }
        let bits = if self.meas { self.rng.gen_range(b2..=(tb - b1).min(l2)) } else { b2 };
        let ab = self.random_simple(l2, bits);
        let TypeExpr::Tensor(a, b) = ab.clone() else { return None };
        let mut body_tys = Self::tys(&r1);
        body_tys.push(&a);
        body_tys.push(&b);
        if !self.fits(&body_tys, t) || Self::min_depth(&body_tys, t) >= d || Self::min_depth(&Self::tys(&r2), &ab) >= d {
            return None;
        }
        let x = self.fresh("x");
        let y = self.fresh("y");
        let bound = self.gen(&ab, r2, d - 1);
        let mut body_res = r1;
        body_res.push(Res { term: Term::var(x.clone()), ty: *a });
        body_res.push(Res { term: Term::var(y.clone()), ty: *b });
        let body = self.gen(t, body_res, d - 1);
        Some(Term::let_pair(x, y, bound, body))
    }

    fn p_pair(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        let TypeExpr::Tensor(t1, t2) = t else { return None };
        for _ in 0..8 {
            let (r1, r2) = self.split_random(res);
            let (tys1, tys2) = (Self::tys(&r1), Self::tys(&r2));
            if self.fits(&tys1, t1)
                && self.fits(&tys2, t2)
                && Self::min_depth(&tys1, t1) < d
                && Self::min_depth(&tys2, t2) < d
            {
                let a = self.gen(t1, r1, d - 1);
                let b = self.gen(t2, r2, d - 1);
                return Some(Term::pair(a, b));
            }
        }
        None
    }

    fn random_param_type(&mut self) -> TypeExpr {
        let n = self.rng.gen_range(1..=2);
        let a = self.random_simple(n, 0);
        let bits = if self.meas && self.rng.gen_bool(0.3) { self.rng.gen_range(0..=n) } else { 0 };
        let u = self.random_simple(n, bits);
        if self.rng.gen_bool(0.5) {
            TypeExpr::circ(a, u)
        } else {
            TypeExpr::bang(TypeExpr::lolli(a, u))
        }
    }

    fn p_param_intro(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        if Self::min_depth(&Self::tys(res), t) + 2 > d {
            return None;
        }
        let p = self.random_param_type();
        let val = self.gen_param(&p, d - 1)?;
        let g = self.fresh(if matches!(p, TypeExpr::Circ(..)) { "c" } else { "f" });
        self.params_env.push((g.clone(), p.clone()));
        let body = self.gen(t, res.to_vec(), d - 2);
        self.params_env.pop();
        Some(Term::app(Term::abs(g, p, body), val))
    }

    fn p_param_use(&mut self, t: &TypeExpr, res: &[Res], d: usize) -> Option<Term> {
        let tys = Self::tys(res);
        let mut options = Vec::new();
        for (g, p) in &self.params_env {
            let (dom, cod, is_circ) = match p {
                TypeExpr::Bang(inner) => match &**inner {
                    TypeExpr::Lolli(a, u) => (a, u, false),
                    _ => continue,
                },
                TypeExpr::Circ(a, u) => (a, u, true),
                _ => continue,
            };
            if **cod == *t && self.fits(&tys, dom) && Self::min_depth(&tys, dom) < d && d >= 3 {
                options.push((1.0, (g.clone(), (**dom).clone(), is_circ)));
            }
        }
        let (g, dom, is_circ) = self.pick(options)?;
        let arg = self.gen(&dom, res.to_vec(), d - 1);
        Some(if is_circ { Term::apply(Term::var(g), arg) } else { Term::app(Term::force(Term::var(g)), arg) })
    }

    fn gen_param(&mut self, p: &TypeExpr, d: usize) -> Option<Term> {
        match p {
            TypeExpr::Circ(a, u) => self.gen_circ(a, u, d),
            TypeExpr::Bang(inner) => match &**inner {
                TypeExpr::Lolli(a, u) if a.is_simple_m_type() && u.is_simple_m_type() => self.gen_bang_fn(a, u, d),
                _ => None,
            },
            TypeExpr::Tensor(a, b) if d >= 2 => {
                let a = self.gen_param(a, d - 1)?;
                let b = self.gen_param(b, d - 1)?;
                Some(Term::pair(a, b))
            }
            _ => None,
        }
    }

    fn gen_circ(&mut self, a: &TypeExpr, u: &TypeExpr, d: usize) -> Option<Term> {
        let w = self.params.weights.clone();
        let mut options: Vec<(f64, u8)> = Vec::new();
        if self.gates.iter().any(|g| g.ins == *a && g.outs == *u) {
            options.push((w.gate, 0));
        }
        if self.params_env.iter().any(|(_, p)| *p == TypeExpr::circ(a.clone(), u.clone())) {
            options.push((w.param_use, 1));
        }
        if d >= 4 && self.fits(&[a], u) && Self::min_depth(&[a], u) + 3 <= d {
            options.push((w.box_, 2));
        }
        match self.pick(options)? {
            0 => {
                let name = self.gates.iter().filter(|g| g.ins == *a && g.outs == *u).map(|g| g.name.clone()).collect::<Vec<_>>();
                let name = name.choose(&mut self.rng)?.clone();
                Some(self.gate_term(&name))
            }
            1 => {
                let want = TypeExpr::circ(a.clone(), u.clone());
                let names: Vec<String> =
                    self.params_env.iter().filter(|(_, p)| *p == want).map(|(g, _)| g.clone()).collect();
                Some(Term::var(names.choose(&mut self.rng)?.clone()))
            }
            _ => {
                let f = self.gen_bang_fn(a, u, d - 1)?;
                Some(Term::box_t(a.clone(), f))
            }
        }
    }

    fn gen_bang_fn(&mut self, a: &TypeExpr, u: &TypeExpr, d: usize) -> Option<Term> {
        let want = TypeExpr::bang(TypeExpr::lolli(a.clone(), u.clone()));
        let names: Vec<String> = self.params_env.iter().filter(|(_, p)| *p == want).map(|(g, _)| g.clone()).collect();
        if !names.is_empty() && self.rng.gen_bool(0.4) {
            return Some(Term::var(names.choose(&mut self.rng)?.clone()));
        }
        if !self.fits(&[a], u) || Self::min_depth(&[a], u) + 2 > d {
            return names.choose(&mut self.rng).map(|g| Term::var(g.clone()));
        }
        let x = self.fresh("q");
        let body = self.gen(u, vec![Res { term: Term::var(x.clone()), ty: a.clone() }], d - 2);
        Some(Term::lift(Term::abs(x, a.clone(), body)))
    }

    fn attempt(&mut self) -> Option<Program> {
        self.names = 0;
        self.params_env.clear();
        let d = self.params.max_depth;
        let budget = self.params.label_budget;
        let n = if budget == 0 || self.rng.gen_bool(0.15) { 0 } else { self.rng.gen_range(1..=budget) };
        let mut labels = LabelContext::new();
        let mut res = Vec::new();
        for i in 0..n {
            let w = if self.rng.gen_bool(0.1) { WireType::bit() } else { WireType::qubit() };
            labels.insert(LabelId(i as u32), w.clone());
            res.push(Res { term: Term::Lab(LabelId(i as u32)), ty: TypeExpr::Wire(w) });
        }
        let (term, ty) = if n > 0 {
            let (_, rb) = counts(&Self::tys(&res));
            let bits = if self.meas && self.rng.gen_bool(0.3) { self.rng.gen_range(rb..=n) } else { rb };
            let t = self.random_simple(n, bits);
            if Self::min_depth(&Self::tys(&res), &t) > d {
                return None;
            }
            res.shuffle(&mut self.rng);
            (self.gen(&t, res, d), t)
        } else {
            let p = self.random_param_type();
            if self.rng.gen_bool(0.3) && d >= 3 {
                let (a, u) = match p.clone() {
                    TypeExpr::Circ(a, u) => (*a, *u),
                    TypeExpr::Bang(inner) => match *inner {
                        TypeExpr::Lolli(a, u) => (*a, *u),
                        _ => return None,
                    },
                    _ => return None,
                };
                if !self.fits(&[&a], &u) || Self::min_depth(&[&a], &u) + 1 > d {
                    return None;
                }
                let x = self.fresh("q");
                let body = self.gen(&u, vec![Res { term: Term::var(x.clone()), ty: a.clone() }], d - 1);
                (Term::abs(x, a.clone(), body), TypeExpr::lolli(a, u))
            } else {
                (self.gen_param(&p, d)?, p)
            }
        };
        let term = renumber_gates(&term, &self.sig, labels.max_label().map_or(0, |l| l.0 + 1));
        Some(Program { labels, term, ty })
    }

    /// A fresh well-typed program; retries on depth overrun.
    pub fn program(&mut self) -> Result<Program, GiveUp> {
        for _ in 0..64 {
            let Some(p) = self.attempt() else { continue };
            if p.term.depth() > self.params.max_depth {
                continue;
            }
            match typecheck(&TypingContext::with_labels(p.labels.clone()), &p.term) {
                Ok(t) if t == p.ty => return Ok(p),
                Ok(t) => return Err(GiveUp(format!("generated {} at {t}, wanted {}", p.term, p.ty))),
                Err(e) => return Err(GiveUp(format!("generated ill-typed {}: {e}", p.term))),
            }
        }
        Err(GiveUp("no program within the depth bound after 64 attempts".to_string()))
    }

    /// A term of type `target` consuming the linear part of `ctx`.
    pub fn welltyped(&mut self, target: &TypeExpr, ctx: &TypingContext) -> Result<Term, GiveUp> {
        let d = self.params.max_depth;
        for _ in 0..64 {
            self.names = 0;
            self.params_env = ctx.vars.iter().filter(|(_, t)| t.is_parameter()).map(|(x, t)| (x.clone(), t.clone())).collect();
            let mut res: Vec<Res> = ctx.labels.iter().map(|(l, w)| Res { term: Term::Lab(l), ty: TypeExpr::Wire(w.clone()) }).collect();
            for (x, t) in &ctx.vars {
                if t.is_linear() {
                    if !t.is_simple_m_type() {
                        return Err(GiveUp(format!("linear variable `{x}` of non-simple type {t}")));
                    }
                    res.push(Res { term: Term::var(x.clone()), ty: t.clone() });
                }
            }
            let candidate = match target {
                t if t.is_simple_m_type() => {
                    if !self.fits(&Self::tys(&res), t) || Self::min_depth(&Self::tys(&res), t) > d {
                        return Err(GiveUp(format!("{t} is not inhabited by the context within depth {d}")));
                    }
                    Some(self.gen(t, res, d))
                }
                t if res.is_empty() => self.gen_param(t, d),
                TypeExpr::Lolli(a, u) if a.is_simple_m_type() && u.is_simple_m_type() => {
                    let x = self.fresh("q");
                    res.push(Res { term: Term::var(x.clone()), ty: (**a).clone() });
                    if !self.fits(&Self::tys(&res), u) || Self::min_depth(&Self::tys(&res), u) + 1 > d {
                        return Err(GiveUp(format!("{target} is not inhabited within depth {d}")));
                    }
                    Some(Term::abs(x, (**a).clone(), self.gen(u, res, d - 1)))
                }
                _ => return Err(GiveUp(format!("unsupported target {target}"))),
            };
            let Some(m) = candidate else { continue };
            let m = renumber_gates(&m, &self.sig, ctx.labels.max_label().map_or(0, |l| l.0 + 1));
            if m.depth() <= d && typecheck(ctx, &m).as_ref() == Ok(target) {
                return Ok(m);
            }
        }
        Err(GiveUp(format!("could not inhabit {target}")))
    }
}

fn free_linear_vars_absent(lam: &Term, res: &[Res]) -> bool {
    let fv = crate::syntax::free_vars(lam);
    let fl = crate::syntax::free_labels(lam);
    res.iter().all(|r| match &r.term {
        Term::Var(x) => !fv.contains(x),
        Term::Lab(l) => !fl.contains(l),
        _ => true,
    })
}

/// Re-allocates the labels of gate literals in left-to-right order from `start`,
/// matching what the parser produces for the printed term.
pub fn renumber_gates(m: &Term, sig: &GateSignature, start: u32) -> Term {
    fn go(m: &Term, sig: &GateSignature, next: &mut u32) -> Term {
        match m {
            Term::BoxedCirc(ins, c, outs) => match gate_sugar_name(ins, c, outs) {
                Some(name) => match sig.gate_literal(name, LabelId(*next)) {
                    Ok((t, n)) => {
                        *next = n.0;
                        t
                    }
                    Err(_) => m.clone(),
                },
                None => m.clone(),
            },
            Term::Var(_) | Term::Lab(_) => m.clone(),
            Term::Abs(x, a, b) => Term::abs(x.clone(), a.clone(), go(b, sig, next)),
            Term::App(a, b) => {
                let a = go(a, sig, next);
                Term::app(a, go(b, sig, next))
            }
            Term::Pair(a, b) => {
                let a = go(a, sig, next);
                Term::pair(a, go(b, sig, next))
            }
            Term::ApplyC(a, b) => {
                let a = go(a, sig, next);
                Term::apply(a, go(b, sig, next))
            }
            Term::LetPair(x, y, a, b) => {
                let a = go(a, sig, next);
                Term::let_pair(x.clone(), y.clone(), a, go(b, sig, next))
            }
            Term::Lift(b) => Term::lift(go(b, sig, next)),
            Term::Force(b) => Term::force(go(b, sig, next)),
            Term::BoxT(t, b) => Term::box_t(t.clone(), go(b, sig, next)),
        }
    }
    let mut next = start;
    go(m, sig, &mut next)
}

pub fn gen_welltyped(params: &GenParams, target: &TypeExpr, ctx: &TypingContext) -> Result<Term, GiveUp> {
    Generator::new(params.clone()).welltyped(target, ctx)
}

/// `count` programs from consecutive seeds, independent of each other.
pub fn gen_corpus(params: &GenParams, count: usize) -> Vec<Result<Program, GiveUp>> {
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let p = GenParams { seed: params.seed.wrapping_add(i as u64), ..params.clone() };
            Generator::new(p).program()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_respects_measurement() {
        let g = Generator::new(GenParams::default());
        let q = TypeExpr::qubit();
        let b = TypeExpr::bit();
        assert!(g.fits(&[&q], &b));
        assert!(!g.fits(&[&b], &q));
        assert!(!g.fits(&[&q, &q], &q));
        let no_meas = Generator::new(GenParams { gate_whitelist: vec!["H".into()], ..GenParams::default() });
        assert!(!no_meas.fits(&[&q], &b));
    }

    #[test]
    fn min_depth_counts_lets_and_measurement() {
        let q = TypeExpr::qubit();
        let qq = TypeExpr::tensor(q.clone(), q.clone());
        assert_eq!(Generator::min_depth(&[&q], &q), 1);
        assert_eq!(Generator::min_depth(&[&qq], &qq), 3);
        assert_eq!(Generator::min_depth(&[&q], &TypeExpr::bit()), 2);
    }

    #[test]
    fn gate_labels_follow_the_parser() {
        let sig = GateSignature::default_signature();
        let (h, _) = sig.gate_literal("H", LabelId(40)).unwrap();
        let m = Term::pair(Term::apply(h.clone(), Term::Lab(LabelId(0))), Term::apply(h, Term::Lab(LabelId(1))));
        let r = renumber_gates(&m, &sig, 2);
        let parsed = crate::syntax::parse(&r.to_string()).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn closed_targets_are_inhabited() {
        let params = GenParams { max_depth: 4, ..GenParams::default() };
        let t = TypeExpr::circ(TypeExpr::qubit(), TypeExpr::qubit());
        for seed in 0..20 {
            let m = gen_welltyped(&GenParams { seed, ..params.clone() }, &t, &TypingContext::empty()).unwrap();
            assert_eq!(typecheck(&TypingContext::empty(), &m), Ok(t.clone()));
        }
    }
}
