//! Types of the fragment: wire types, tensors, linear arrows, bang and boxed circuits.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A wire type drawn from the active gate signature.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireType(pub String);

impl WireType {
    pub fn new(name: impl Into<String>) -> Self {
        WireType(name.into())
    }

    pub fn qubit() -> Self {
        WireType("Qubit".to_string())
    }

    pub fn bit() -> Self {
        WireType("Bit".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WireType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeExpr {
    Wire(WireType),
    Tensor(Box<TypeExpr>, Box<TypeExpr>),
    Lolli(Box<TypeExpr>, Box<TypeExpr>),
    Bang(Box<TypeExpr>),
    Circ(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn qubit() -> Self {
        TypeExpr::Wire(WireType::qubit())
    }

    pub fn bit() -> Self {
        TypeExpr::Wire(WireType::bit())
    }

    pub fn tensor(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Lolli(Box::new(a), Box::new(b))
    }

    pub fn bang(a: TypeExpr) -> Self {
        TypeExpr::Bang(Box::new(a))
    }

    pub fn circ(t: TypeExpr, u: TypeExpr) -> Self {
        TypeExpr::Circ(Box::new(t), Box::new(u))
    }

    /// `P, R ::= P * R | !A | Circ(T, U)`
    pub fn is_parameter(&self) -> bool {
        match self {
            TypeExpr::Tensor(a, b) => a.is_parameter() && b.is_parameter(),
            TypeExpr::Bang(_) | TypeExpr::Circ(..) => true,
            TypeExpr::Wire(_) | TypeExpr::Lolli(..) => false,
        }
    }

    pub fn is_linear(&self) -> bool {
        !self.is_parameter()
    }

    /// `T, U ::= alpha | T * U`
    pub fn is_simple_m_type(&self) -> bool {
        match self {
            TypeExpr::Wire(_) => true,
            TypeExpr::Tensor(a, b) => a.is_simple_m_type() && b.is_simple_m_type(),
            _ => false,
        }
    }

    /// Leaves of a tensor tree, left to right.
    pub fn wire_leaves(&self) -> Vec<WireType> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<WireType>) {
        match self {
            TypeExpr::Wire(w) => out.push(w.clone()),
            TypeExpr::Tensor(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            _ => {}
        }
    }

    /// Every wire type mentioned anywhere in the type.
    pub fn mentioned_wires(&self, out: &mut Vec<WireType>) {
        match self {
            TypeExpr::Wire(w) => out.push(w.clone()),
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) | TypeExpr::Circ(a, b) => {
                a.mentioned_wires(out);
                b.mentioned_wires(out);
            }
            TypeExpr::Bang(a) => a.mentioned_wires(out),
        }
    }

    /// Number of type constructors.
    pub fn size(&self) -> usize {
        match self {
            TypeExpr::Wire(_) => 1,
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) | TypeExpr::Circ(a, b) => {
                1 + a.size() + b.size()
            }
            TypeExpr::Bang(a) => 1 + a.size(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // 0: arrow position, 1: tensor operand, 2: bang operand
        match self {
            TypeExpr::Wire(w) => write!(f, "{w}"),
            TypeExpr::Circ(t, u) => write!(f, "Circ({t}, {u})"),
            TypeExpr::Bang(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, 2)
            }
            TypeExpr::Tensor(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2)?;
                f.write_str(" * ")?;
                b.fmt_prec(f, 1)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            TypeExpr::Lolli(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" -o ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
