//! Labelled circuits: typed label frontiers over an ordered list of gate applications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::syntax::{free_labels, LabelId, LabelTuple, Term};
use crate::types::{TypeExpr, WireType};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("shape mismatch at {position}: {detail}")]
    ShapeMismatch { position: String, detail: String },
    #[error("wire type mismatch at {position}: expected {expected}, found {found}")]
    TypeMismatch { position: String, expected: WireType, found: WireType },
    #[error("label {label} at {position} is not an available output of the circuit")]
    UnknownOutputLabel { position: String, label: LabelId },
    #[error("renaming is not injective: {0} and {1} both map to {2}")]
    NonInjective(LabelId, LabelId, LabelId),
    #[error("ill-formed wiring: {0}")]
    Wiring(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{0}` has no inputs and cannot be boxed")]
    GateNotBoxable(String),
    #[error("{0} is not a simple M-type")]
    NotSimple(TypeExpr),
    #[error("bad signature: {0}")]
    Signature(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelEntry {
    pub label: LabelId,
    pub wire: WireType,
}

/// Ordered map from labels to wire types.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<LabelEntry>", into = "Vec<LabelEntry>")]
pub struct LabelContext(BTreeMap<LabelId, WireType>);

impl TryFrom<Vec<LabelEntry>> for LabelContext {
    type Error = String;

    fn try_from(entries: Vec<LabelEntry>) -> Result<Self, String> {
        let mut q = LabelContext::new();
        for e in entries {
            if q.insert(e.label, e.wire).is_some() {
                return Err(format!("label {} listed twice", e.label));
            }
        }
        Ok(q)
    }
}

impl From<LabelContext> for Vec<LabelEntry> {
    fn from(q: LabelContext) -> Self {
        q.0.into_iter().map(|(label, wire)| LabelEntry { label, wire }).collect()
    }
}

impl LabelContext {
    pub fn new() -> Self {
        LabelContext(BTreeMap::new())
    }

    pub fn insert(&mut self, l: LabelId, w: WireType) -> Option<WireType> {
        self.0.insert(l, w)
    }

    pub fn remove(&mut self, l: LabelId) -> Option<WireType> {
        self.0.remove(&l)
    }

    pub fn get(&self, l: LabelId) -> Option<&WireType> {
        self.0.get(&l)
    }

    pub fn contains(&self, l: LabelId) -> bool {
        self.0.contains_key(&l)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabelId, &WireType)> {
        self.0.iter().map(|(l, w)| (*l, w))
    }

    pub fn labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.0.keys().copied()
    }

    pub fn max_label(&self) -> Option<LabelId> {
        self.0.keys().next_back().copied()
    }

    pub fn restrict(&self, keep: &BTreeSet<LabelId>) -> LabelContext {
        LabelContext(self.0.iter().filter(|(l, _)| keep.contains(l)).map(|(l, w)| (*l, w.clone())).collect())
    }

    /// Type of a label tuple whose leaves are all in this context.
    pub fn type_of_tuple(&self, k: &LabelTuple) -> Option<TypeExpr> {
        match k {
            LabelTuple::Leaf(l) => self.get(*l).map(|w| TypeExpr::Wire(w.clone())),
            LabelTuple::Pair(a, b) => Some(TypeExpr::tensor(self.type_of_tuple(a)?, self.type_of_tuple(b)?)),
        }
    }
}

impl FromIterator<(LabelId, WireType)> for LabelContext {
    fn from_iter<I: IntoIterator<Item = (LabelId, WireType)>>(iter: I) -> Self {
        LabelContext(iter.into_iter().collect())
    }
}

impl fmt::Display for LabelContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, w)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}:{w}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateArity {
    pub ins: Vec<WireType>,
    pub outs: Vec<WireType>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSignature {
    pub wire_types: BTreeSet<WireType>,
    pub gates: BTreeMap<String, GateArity>,
}

impl Default for GateSignature {
    fn default() -> Self {
        Self::default_signature()
    }
}

impl GateSignature {
    /// H, X : Qubit -> Qubit; CNOT : Qubit Qubit -> Qubit Qubit; Meas : Qubit -> Bit; Init : -> Qubit.
    pub fn default_signature() -> Self {
        let q = WireType::qubit;
        let gate = |ins: Vec<WireType>, outs: Vec<WireType>| GateArity { ins, outs };
        GateSignature {
            wire_types: BTreeSet::from([q(), WireType::bit()]),
            gates: BTreeMap::from([
                ("H".to_string(), gate(vec![q()], vec![q()])),
                ("X".to_string(), gate(vec![q()], vec![q()])),
                ("CNOT".to_string(), gate(vec![q(), q()], vec![q(), q()])),
                ("Meas".to_string(), gate(vec![q()], vec![WireType::bit()])),
                ("Init".to_string(), gate(vec![], vec![q()])),
            ]),
        }
    }

    pub fn from_json(src: &str) -> Result<Self, CircuitError> {
        let sig: GateSignature =
            serde_json::from_str(src).map_err(|e| CircuitError::Signature(e.to_string()))?;
        for (name, g) in &sig.gates {
            for w in g.ins.iter().chain(&g.outs) {
                if !sig.wire_types.contains(w) {
                    return Err(CircuitError::Signature(format!(
                        "gate `{name}` uses undeclared wire type `{w}`"
                    )));
                }
            }
        }
        Ok(sig)
    }

    pub fn gate(&self, name: &str) -> Option<&GateArity> {
        self.gates.get(name)
    }

    /// The boxed single-gate circuit `(ins, G, outs)` with labels allocated from `first`.
    /// Returns the literal and the next unused label.
    pub fn gate_literal(&self, name: &str, first: LabelId) -> Result<(Term, LabelId), CircuitError> {
        let g = self.gate(name).ok_or_else(|| CircuitError::UnknownGate(name.to_string()))?;
        let mut next = first.0;
        let mut alloc = |ws: &[WireType]| {
            ws.iter()
                .map(|w| {
                    next += 1;
                    (LabelId(next - 1), w.clone())
                })
                .collect::<Vec<_>>()
        };
        let ins = alloc(&g.ins);
        let outs = alloc(&g.outs);
        let ins_tuple = LabelTuple::right_nested(&ins.iter().map(|e| e.0).collect::<Vec<_>>())
            .ok_or_else(|| CircuitError::GateNotBoxable(name.to_string()))?;
        let outs_tuple = LabelTuple::right_nested(&outs.iter().map(|e| e.0).collect::<Vec<_>>())
            .ok_or_else(|| CircuitError::GateNotBoxable(name.to_string()))?;
        let circ = LabelledCircuit {
            inputs: ins.iter().cloned().collect(),
            gates: vec![GateApp {
                name: name.to_string(),
                ins: ins.iter().map(|e| e.0).collect(),
                outs: outs.iter().map(|e| e.0).collect(),
            }],
            outputs: outs.iter().cloned().collect(),
        };
        Ok((Term::boxed(ins_tuple, circ, outs_tuple), LabelId(next)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateApp {
    pub name: String,
    pub ins: Vec<LabelId>,
    pub outs: Vec<LabelId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelledCircuit {
    pub inputs: LabelContext,
    pub gates: Vec<GateApp>,
    pub outputs: LabelContext,
}

pub fn identity(q: &LabelContext) -> LabelledCircuit {
    LabelledCircuit { inputs: q.clone(), gates: Vec::new(), outputs: q.clone() }
}

/// A typed tuple of labels shaped like `t`, numbered above every free label of `m`.
pub fn freshlabels(m: &Term, t: &TypeExpr) -> Result<(LabelContext, LabelTuple), CircuitError> {
    if !t.is_simple_m_type() {
        return Err(CircuitError::NotSimple(t.clone()));
    }
    let mut next = free_labels(m).last().map_or(0, |l| l.0 + 1);
    let mut q = LabelContext::new();
    let k = shape_labels(t, &mut next, &mut q);
    Ok((q, k))
}

fn shape_labels(t: &TypeExpr, next: &mut u32, q: &mut LabelContext) -> LabelTuple {
    match t {
        TypeExpr::Tensor(a, b) => {
            let a = shape_labels(a, next, q);
            let b = shape_labels(b, next, q);
            LabelTuple::pair(a, b)
        }
        TypeExpr::Wire(w) => {
            let l = LabelId(*next);
            *next += 1;
            q.insert(l, w.clone());
            LabelTuple::Leaf(l)
        }
        _ => unreachable!("checked simple"),
    }
}

fn zip_tuples(
    k: &LabelTuple,
    ins: &LabelTuple,
    path: &mut String,
    out: &mut Vec<(String, LabelId, LabelId)>,
) -> Result<(), CircuitError> {
    match (k, ins) {
        (LabelTuple::Leaf(a), LabelTuple::Leaf(b)) => {
            out.push((position(path), *a, *b));
            Ok(())
        }
        (LabelTuple::Pair(a, b), LabelTuple::Pair(c, d)) => {
            path.push('l');
            zip_tuples(a, c, path, out)?;
            path.pop();
            path.push('r');
            zip_tuples(b, d, path, out)?;
            path.pop();
            Ok(())
        }
        _ => Err(CircuitError::ShapeMismatch {
            position: position(path),
            detail: format!("argument {k} does not match interface {ins}"),
        }),
    }
}

fn position(path: &str) -> String {
    if path.is_empty() {
        "tuple root".to_string()
    } else {
        format!("tuple position {path}")
    }
}

/// Grafts `(ins, d, outs)` onto the outputs `k` of `c`.
pub fn append(
    c: &LabelledCircuit,
    k: &LabelTuple,
    ins: &LabelTuple,
    d: &LabelledCircuit,
    outs: &LabelTuple,
) -> Result<(LabelledCircuit, LabelTuple), CircuitError> {
    let mut pairs = Vec::new();
    zip_tuples(k, ins, &mut String::new(), &mut pairs)?;
    let mut available = c.outputs.clone();
    let mut map: BTreeMap<LabelId, LabelId> = BTreeMap::new();
    for (pos, kl, il) in &pairs {
        let found = available
            .remove(*kl)
            .ok_or_else(|| CircuitError::UnknownOutputLabel { position: pos.clone(), label: *kl })?;
        let expected = d.inputs.get(*il).ok_or_else(|| CircuitError::ShapeMismatch {
            position: pos.clone(),
            detail: format!("{il} is not an input of the boxed circuit"),
        })?;
        if *expected != found {
            return Err(CircuitError::TypeMismatch {
                position: pos.clone(),
                expected: expected.clone(),
                found,
            });
        }
        if map.insert(*il, *kl).is_some() {
            return Err(CircuitError::ShapeMismatch {
                position: pos.clone(),
                detail: format!("{il} occurs twice in the interface"),
            });
        }
    }
    if map.len() != d.inputs.len() {
        return Err(CircuitError::ShapeMismatch {
            position: "tuple root".to_string(),
            detail: "interface does not cover the boxed circuit's inputs".to_string(),
        });
    }
    let out_leaves = outs.leaves();
    if outs.has_duplicates()
        || out_leaves.len() != d.outputs.len()
        || out_leaves.iter().any(|l| !d.outputs.contains(*l))
    {
        return Err(CircuitError::ShapeMismatch {
            position: "output interface".to_string(),
            detail: format!("{outs} does not enumerate the boxed circuit's outputs"),
        });
    }
    let mut next = c.max_label().map_or(0, |l| l.0 + 1);
    let mut fresh = |l: LabelId, map: &mut BTreeMap<LabelId, LabelId>| -> LabelId {
        *map.entry(l).or_insert_with(|| {
            next += 1;
            LabelId(next - 1)
        })
    };
    let mut gates = c.gates.clone();
    for g in &d.gates {
        let ins = g.ins.iter().map(|l| fresh(*l, &mut map)).collect();
        let outs = g.outs.iter().map(|l| fresh(*l, &mut map)).collect();
        gates.push(GateApp { name: g.name.clone(), ins, outs });
    }
    let mut outputs = available;
    for (l, w) in d.outputs.iter() {
        outputs.insert(fresh(l, &mut map), w.clone());
    }
    let k2 = outs.map(&mut |l| map[&l]);
    Ok((LabelledCircuit { inputs: c.inputs.clone(), gates, outputs }, k2))
}

/// Canonical numbering of a circuit, used for equivalence up to renaming.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalCircuit {
    pub inputs: Vec<(u32, WireType)>,
    pub gates: Vec<(String, Vec<u32>, Vec<u32>)>,
    pub outputs: Vec<(u32, WireType)>,
}

impl LabelledCircuit {
    pub fn all_labels(&self) -> BTreeSet<LabelId> {
        let mut out: BTreeSet<LabelId> = self.inputs.labels().chain(self.outputs.labels()).collect();
        for g in &self.gates {
            out.extend(g.ins.iter().chain(&g.outs));
        }
        out
    }

    pub fn max_label(&self) -> Option<LabelId> {
        self.all_labels().last().copied()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Linear wiring: every label produced once and consumed once, in topological order.
    pub fn check_wiring(&self) -> Result<(), CircuitError> {
        let mut live: BTreeMap<LabelId, Option<WireType>> =
            self.inputs.iter().map(|(l, w)| (l, Some(w.clone()))).collect();
        let mut seen: BTreeSet<LabelId> = self.inputs.labels().collect();
        for (i, g) in self.gates.iter().enumerate() {
            for l in &g.ins {
                if live.remove(l).is_none() {
                    return Err(CircuitError::Wiring(format!(
                        "gate {i} ({}) consumes {l}, which is not live",
                        g.name
                    )));
                }
            }
            for l in &g.outs {
                if !seen.insert(*l) {
                    return Err(CircuitError::Wiring(format!(
                        "gate {i} ({}) produces {l}, which was already produced",
                        g.name
                    )));
                }
                live.insert(*l, None);
            }
        }
        let live_set: BTreeSet<LabelId> = live.keys().copied().collect();
        let out_set: BTreeSet<LabelId> = self.outputs.labels().collect();
        if live_set != out_set {
            return Err(CircuitError::Wiring(format!(
                "outputs {:?} differ from live wires {:?}",
                out_set, live_set
            )));
        }
        for (l, w) in live {
            if let Some(w) = w {
                if self.outputs.get(l) != Some(&w) {
                    return Err(CircuitError::Wiring(format!("pass-through wire {l} changes type")));
                }
            }
        }
        Ok(())
    }

    /// Wiring plus positional port types against `sig`.
    pub fn check_signature(&self, sig: &GateSignature) -> Result<(), CircuitError> {
        self.check_wiring()?;
        let types = self.label_types(sig)?;
        for (l, w) in self.outputs.iter() {
            if types.get(&l) != Some(w) {
                return Err(CircuitError::Wiring(format!("output {l} is not of type {w}")));
            }
        }
        Ok(())
    }

    /// Wire type of every label, following gate arities in `sig`.
    pub fn label_types(&self, sig: &GateSignature) -> Result<BTreeMap<LabelId, WireType>, CircuitError> {
        let mut types: BTreeMap<LabelId, WireType> =
            self.inputs.iter().map(|(l, w)| (l, w.clone())).collect();
        for g in &self.gates {
            let a = sig.gate(&g.name).ok_or_else(|| CircuitError::UnknownGate(g.name.clone()))?;
            if a.ins.len() != g.ins.len() || a.outs.len() != g.outs.len() {
                return Err(CircuitError::Wiring(format!("gate {} applied with wrong arity", g.name)));
            }
            for (i, (l, w)) in g.ins.iter().zip(&a.ins).enumerate() {
                match types.get(l) {
                    Some(t) if t == w => {}
                    Some(t) => {
                        return Err(CircuitError::TypeMismatch {
                            position: format!("{} input {i}", g.name),
                            expected: w.clone(),
                            found: t.clone(),
                        })
                    }
                    None => return Err(CircuitError::Wiring(format!("{l} used before definition"))),
                }
            }
            for (l, w) in g.outs.iter().zip(&a.outs) {
                types.insert(*l, w.clone());
            }
        }
        Ok(types)
    }

    /// Applies `map` (identity outside its domain), which must be injective on the circuit's labels.
    pub fn rename(&self, map: &BTreeMap<LabelId, LabelId>) -> Result<LabelledCircuit, CircuitError> {
        let f = |l: LabelId| *map.get(&l).unwrap_or(&l);
        let mut image: BTreeMap<LabelId, LabelId> = BTreeMap::new();
        for l in self.all_labels() {
            if let Some(prev) = image.insert(f(l), l) {
                return Err(CircuitError::NonInjective(prev, l, f(l)));
            }
        }
        let ctx = |q: &LabelContext| q.iter().map(|(l, w)| (f(l), w.clone())).collect();
        Ok(LabelledCircuit {
            inputs: ctx(&self.inputs),
            gates: self
                .gates
                .iter()
                .map(|g| GateApp {
                    name: g.name.clone(),
                    ins: g.ins.iter().map(|l| f(*l)).collect(),
                    outs: g.outs.iter().map(|l| f(*l)).collect(),
                })
                .collect(),
            outputs: ctx(&self.outputs),
        })
    }

    /// Numbers `seeds` first, then labels in gate order (ports left to right),
    /// then the remaining frontier labels by wire type.
    pub fn canonical_form(&self, seeds: &[LabelId]) -> (CanonicalCircuit, BTreeMap<LabelId, u32>) {
        let mut num: BTreeMap<LabelId, u32> = BTreeMap::new();
        let assign = |l: LabelId, num: &mut BTreeMap<LabelId, u32>| {
            let n = num.len() as u32;
            *num.entry(l).or_insert(n)
        };
        for l in seeds {
            assign(*l, &mut num);
        }
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let ins = g.ins.iter().map(|l| assign(*l, &mut num)).collect();
                let outs = g.outs.iter().map(|l| assign(*l, &mut num)).collect();
                (g.name.clone(), ins, outs)
            })
            .collect();
        for q in [&self.inputs, &self.outputs] {
            let mut rest: Vec<(&WireType, LabelId)> =
                q.iter().filter(|(l, _)| !num.contains_key(l)).map(|(l, w)| (w, l)).collect();
            rest.sort();
            for (_, l) in rest {
                assign(l, &mut num);
            }
        }
        let ctx = |q: &LabelContext| {
            let mut v: Vec<(u32, WireType)> = q.iter().map(|(l, w)| (num[&l], w.clone())).collect();
            v.sort();
            v
        };
        let canon = CanonicalCircuit { inputs: ctx(&self.inputs), gates, outputs: ctx(&self.outputs) };
        (canon, num)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn from_json(src: &str) -> Result<LabelledCircuit, CircuitError> {
        let c: LabelledCircuit =
            serde_json::from_str(src).map_err(|e| CircuitError::Wiring(e.to_string()))?;
        c.check_wiring()?;
        Ok(c)
    }

    pub fn to_dot(&self, sig: &GateSignature) -> String {
        let types = self.label_types(sig).unwrap_or_default();
        let mut producer: BTreeMap<LabelId, String> =
            self.inputs.labels().map(|l| (l, "inputs".to_string())).collect();
        let mut consumer: BTreeMap<LabelId, String> =
            self.outputs.labels().map(|l| (l, "outputs".to_string())).collect();
        let mut out = String::from("digraph circuit {\n  rankdir=LR;\n");
        out.push_str("  inputs [shape=plaintext, label=\"in\"];\n");
        out.push_str("  outputs [shape=plaintext, label=\"out\"];\n");
        for (i, g) in self.gates.iter().enumerate() {
            let _ = writeln!(out, "  g{i} [shape=box, label=\"{}\"];", g.name);
            for l in &g.ins {
                consumer.insert(*l, format!("g{i}"));
            }
            for l in &g.outs {
                producer.insert(*l, format!("g{i}"));
            }
        }
        for l in self.all_labels() {
            let from = producer.get(&l).map_or("inputs", |s| s.as_str());
            let to = consumer.get(&l).map_or("outputs", |s| s.as_str());
            let w = types.get(&l).map_or("?", |w| w.as_str());
            let _ = writeln!(out, "  {from} -> {to} [label=\"{l}:{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

pub fn equiv(a: &LabelledCircuit, b: &LabelledCircuit) -> bool {
    a.canonical_form(&[]).0 == b.canonical_form(&[]).0
}

/// Equivalence of boxed circuits `(ins, C, outs)`: the interfaces must correspond
/// under the same renaming that identifies the circuits.
pub fn boxed_equiv(
    (ins1, c1, outs1): (&LabelTuple, &LabelledCircuit, &LabelTuple),
    (ins2, c2, outs2): (&LabelTuple, &LabelledCircuit, &LabelTuple),
) -> bool {
    if !ins1.same_shape(ins2) || !outs1.same_shape(outs2) {
        return false;
    }
    let (k1, n1) = c1.canonical_form(&ins1.leaves());
    let (k2, n2) = c2.canonical_form(&ins2.leaves());
    let num = |n: &BTreeMap<LabelId, u32>, t: &LabelTuple| {
        t.leaves().iter().map(|l| n.get(l).copied()).collect::<Vec<_>>()
    };
    k1 == k2 && num(&n1, ins1) == num(&n2, ins2) && num(&n1, outs1) == num(&n2, outs2)
}

impl fmt::Display for LabelledCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.inputs)?;
        for (i, g) in self.gates.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(&g.name)?;
            for l in &g.ins {
                write!(f, " {l}")?;
            }
            f.write_str(" ->")?;
            for l in &g.outs {
                write!(f, " {l}")?;
            }
        }
        write!(f, "] {}", self.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: u32) -> LabelId {
        LabelId(n)
    }

    fn qctx(ls: &[u32]) -> LabelContext {
        ls.iter().map(|n| (l(*n), WireType::qubit())).collect()
    }

    fn h_gate(a: u32, b: u32) -> LabelledCircuit {
        LabelledCircuit {
            inputs: qctx(&[a]),
            gates: vec![GateApp { name: "H".into(), ins: vec![l(a)], outs: vec![l(b)] }],
            outputs: qctx(&[b]),
        }
    }

    fn leaf(n: u32) -> LabelTuple {
        LabelTuple::Leaf(l(n))
    }

    #[test]
    fn identity_frontiers() {
        let c = identity(&LabelContext::new());
        assert!(c.inputs.is_empty() && c.outputs.is_empty() && c.gates.is_empty());
        let c = identity(&qctx(&[0]));
        assert_eq!(c.inputs, c.outputs);
        assert!(c.check_wiring().is_ok());
    }

    #[test]
    fn freshlabels_above_free_labels() {
        let (q, k) = freshlabels(&Term::Lab(l(7)), &TypeExpr::qubit()).unwrap();
        assert_eq!(k, leaf(8));
        assert_eq!(q, qctx(&[8]));
        let t = TypeExpr::tensor(TypeExpr::qubit(), TypeExpr::bit());
        let (q, k) = freshlabels(&Term::abs("x", TypeExpr::bit(), Term::var("x")), &t).unwrap();
        assert_eq!(k, LabelTuple::pair(leaf(0), leaf(1)));
        assert_eq!(q.get(l(1)), Some(&WireType::bit()));
        assert!(freshlabels(&Term::Lab(l(0)), &TypeExpr::lolli(t.clone(), t)).is_err());
    }

    #[test]
    fn append_single_gate() {
        let (c, k) = append(&identity(&qctx(&[0])), &leaf(0), &leaf(1), &h_gate(1, 2), &leaf(2)).unwrap();
        assert_eq!(k, leaf(1));
        assert_eq!(c.gates, vec![GateApp { name: "H".into(), ins: vec![l(0)], outs: vec![l(1)] }]);
        assert_eq!(c.outputs, qctx(&[1]));
        c.check_wiring().unwrap();
    }

    #[test]
    fn append_identity_is_unit() {
        let c = h_gate(0, 3);
        let (c2, k) = append(&c, &leaf(3), &leaf(1), &identity(&qctx(&[1])), &leaf(1)).unwrap();
        assert_eq!(k, leaf(3));
        assert!(equiv(&c, &c2));
    }

    #[test]
    fn append_rejects_duplicate_and_shape() {
        let c = identity(&qctx(&[0, 1]));
        let cnot = LabelledCircuit {
            inputs: qctx(&[2, 3]),
            gates: vec![GateApp { name: "CNOT".into(), ins: vec![l(2), l(3)], outs: vec![l(4), l(5)] }],
            outputs: qctx(&[4, 5]),
        };
        let ins = LabelTuple::pair(leaf(2), leaf(3));
        let outs = LabelTuple::pair(leaf(4), leaf(5));
        let dup = LabelTuple::pair(leaf(0), leaf(0));
        assert!(matches!(
            append(&c, &dup, &ins, &cnot, &outs),
            Err(CircuitError::UnknownOutputLabel { .. })
        ));
        assert!(matches!(append(&c, &leaf(0), &ins, &cnot, &outs), Err(CircuitError::ShapeMismatch { .. })));
        let mut bits = c.clone();
        bits.inputs.insert(l(1), WireType::bit());
        bits.outputs.insert(l(1), WireType::bit());
        assert!(matches!(
            append(&bits, &LabelTuple::pair(leaf(0), leaf(1)), &ins, &cnot, &outs),
            Err(CircuitError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn rename_and_equiv() {
        let c = h_gate(1, 2);
        assert_eq!(c.rename(&BTreeMap::new()).unwrap(), c);
        let r = c.rename(&BTreeMap::from([(l(1), l(9)), (l(2), l(4))])).unwrap();
        assert_eq!(r, h_gate(9, 4));
        assert!(equiv(&c, &r));
        assert!(c.rename(&BTreeMap::from([(l(1), l(2))])).is_err());
        assert!(equiv(&h_gate(1, 2), &h_gate(5, 9)));
        let mut x = h_gate(1, 2);
        x.gates[0].name = "X".into();
        assert!(!equiv(&h_gate(1, 2), &x));
    }

    #[test]
    fn wiring_checker() {
        let mut c = h_gate(0, 1);
        c.check_signature(&GateSignature::default_signature()).unwrap();
        c.outputs = qctx(&[0]);
        assert!(c.check_wiring().is_err());
        let mut c = h_gate(0, 1);
        c.gates.push(GateApp { name: "H".into(), ins: vec![l(0)], outs: vec![l(2)] });
        assert!(c.check_wiring().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = h_gate(0, 1);
        let s = c.to_json();
        assert_eq!(
            s,
            r#"{"inputs":[{"label":0,"wire":"Qubit"}],"gates":[{"name":"H","ins":[0],"outs":[1]}],"outputs":[{"label":1,"wire":"Qubit"}]}"#
        );
        assert_eq!(LabelledCircuit::from_json(&s).unwrap(), c);
        assert!(LabelledCircuit::from_json(r#"{"inputs":[],"gates":[],"outputs":[{"label":0,"wire":"Qubit"}]}"#).is_err());
    }

    #[test]
    fn dot_has_one_node_per_gate() {
        let dot = h_gate(0, 1).to_dot(&GateSignature::default_signature());
        assert_eq!(dot.matches("shape=box").count(), 1);
        assert!(dot.contains("inputs -> g0 [label=\"#0:Qubit\"]"));
        assert!(dot.contains("g0 -> outputs [label=\"#1:Qubit\"]"));
    }

    #[test]
    fn gate_literal_labels() {
        let sig = GateSignature::default_signature();
        let (t, next) = sig.gate_literal("CNOT", l(3)).unwrap();
        assert_eq!(next, l(7));
        match t {
            Term::BoxedCirc(ins, c, outs) => {
                assert_eq!(ins, LabelTuple::pair(leaf(3), leaf(4)));
                assert_eq!(outs, LabelTuple::pair(leaf(5), leaf(6)));
                c.check_signature(&sig).unwrap();
            }
            _ => unreachable!(),
        }
        assert!(matches!(sig.gate_literal("Init", l(0)), Err(CircuitError::GateNotBoxable(_))));
        assert!(matches!(sig.gate_literal("T", l(0)), Err(CircuitError::UnknownGate(_))));
    }
}
