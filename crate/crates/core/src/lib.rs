//! Proto-Quipper-M: a linear lambda calculus for building quantum circuits,
//! with four evaluators that are checked against each other.

pub mod bigstep;
pub mod circuit;
pub mod cli;
pub mod correspondence;
pub mod harness;
pub mod machine;
pub mod mutant;
pub mod smallstep;
pub mod stacked;
pub mod syntax;
pub mod typecheck;
pub mod types;

pub use circuit::{GateSignature, LabelContext, LabelledCircuit};
pub use correspondence::{OutcomeClass, RunOutcome};
pub use syntax::{parse, pretty, LabelId, LabelTuple, Term};
pub use types::{TypeExpr, WireType};
