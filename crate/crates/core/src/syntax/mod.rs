//! Terms of the fragment, concrete syntax and the binding operations.

mod parse;
mod pretty;
mod term;

pub use parse::{is_keyword, parse, parse_program, parse_type, ParseError, Parsed, Span, SpanTree};
pub use pretty::{gate_sugar_name, pretty};
pub use term::{
    all_names, alpha_eq, alpha_eq_by, free_labels, free_vars, fresh_name, occurs_free, substitute,
    LabelId, LabelTuple, Term,
};

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&pretty(self))
    }
}
