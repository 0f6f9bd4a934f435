use std::fmt;

use crate::circuit::{GateApp, GateSignature, LabelContext, LabelledCircuit};
use crate::syntax::term::{LabelId, LabelTuple, Term};
use crate::types::{TypeExpr, WireType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source positions mirroring the shape of a parsed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: Span) -> Self {
        SpanTree { span, children: Vec::new() }
    }

    /// Span of the deepest node along `path` that the tree still covers.
    pub fn lookup(&self, path: &[u8]) -> Span {
        let mut cur = self;
        for &i in path {
            match cur.children.get(i as usize) {
                Some(c) => cur = c,
                None => break,
            }
        }
        cur.span
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Parsed {
    pub term: Term,
    pub spans: SpanTree,
    /// Label types declared by a `-- inputs: #0:Qubit, ...` comment.
    pub inputs: Option<LabelContext>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Label(u32),
    Lambda,
    Colon,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Star,
    Lolli,
    Arrow,
    Bang,
    Bar,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Label(n) => write!(f, "`#{n}`"),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::Lambda => "\\",
                    Tok::Colon => ":",
                    Tok::Dot => ".",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LAngle => "<",
                    Tok::RAngle => ">",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Eq => "=",
                    Tok::Star => "*",
                    Tok::Lolli => "-o",
                    Tok::Arrow => "->",
                    Tok::Bang => "!",
                    Tok::Bar => "|",
                    Tok::Semi => ";",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

const KEYWORDS: [&str; 8] = ["let", "in", "lift", "force", "box", "apply", "gate", "circ"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Lexed {
    toks: Vec<(Tok, Span)>,
    pragma: Option<(String, Span)>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let mut pragma = None;
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |span, message: String| Err(ParseError { span, message });
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let start = i + 2;
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            if let Some(rest) = text.trim().strip_prefix("inputs:") {
                pragma = Some((rest.to_string(), span));
            }
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => Tok::Lambda,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '<' | '⟨' => Tok::LAngle,
            '>' | '⟩' => Tok::RAngle,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '*' | '⊗' => Tok::Star,
            '⊸' => Tok::Lolli,
            '!' => Tok::Bang,
            '|' => Tok::Bar,
            ';' => Tok::Semi,
            '-' => match chars.get(i + 1) {
                Some('o') => {
                    advance(1, &mut i, &mut col);
                    Tok::Lolli
                }
                Some('>') => {
                    advance(1, &mut i, &mut col);
                    Tok::Arrow
                }
                _ => return err(span, "expected `-o`, `->` or `--`".into()),
            },
            '#' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return err(span, "expected digits after `#`".into());
                }
                let digits: String = chars[start..j].iter().collect();
                let n: u32 = digits
                    .parse()
                    .map_err(|_| ParseError { span, message: format!("label #{digits} too large") })?;
                advance(j - i, &mut i, &mut col);
                toks.push((Tok::Label(n), span));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                advance(j - i, &mut i, &mut col);
                toks.push((Tok::Ident(word), span));
                continue;
            }
            other => return err(span, format!("unexpected character `{other}`")),
        };
        advance(1, &mut i, &mut col);
        toks.push((tok, span));
    }
    toks.push((Tok::Eof, Span { line, col }));
    Ok(Lexed { toks, pragma })
}

struct Parser<'s> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    sig: &'s GateSignature,
    next_label: u32,
}

type PResult<T> = Result<T, ParseError>;

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { span: self.span(), message: message.into() })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.fail(format!("expected identifier, found {other}")),
        }
    }

    fn label(&mut self) -> PResult<LabelId> {
        match self.peek().clone() {
            Tok::Label(n) => {
                self.bump();
                Ok(LabelId(n))
            }
            other => self.fail(format!("expected label, found {other}")),
        }
    }

    fn term(&mut self) -> PResult<(Term, SpanTree)> {
        let span = self.span();
        let node = |t: Term, children: Vec<SpanTree>| (t, SpanTree { span, children });
        match self.peek().clone() {
            Tok::Lambda => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let ann = self.ty()?;
                self.expect(Tok::Dot)?;
                let (body, bs) = self.term()?;
                Ok(node(Term::abs(x, ann, body), vec![bs]))
            }
            Tok::Ident(k) if k == "let" => {
                self.bump();
                self.expect(Tok::LAngle)?;
                let x = self.ident()?;
                self.expect(Tok::Comma)?;
                let y_span = self.span();
                let y = self.ident()?;
                if x == y {
                    return Err(ParseError { span: y_span, message: format!("`{x}` bound twice in let") });
                }
                self.expect(Tok::RAngle)?;
                self.expect(Tok::Eq)?;
                let (m, ms) = self.term()?;
                self.expect_kw("in")?;
                let (n, ns) = self.term()?;
                Ok(node(Term::let_pair(x, y, m, n), vec![ms, ns]))
            }
            Tok::Ident(k) if k == "lift" || k == "force" => {
                self.bump();
                let (m, ms) = self.term()?;
                let t = if k == "lift" { Term::lift(m) } else { Term::force(m) };
                Ok(node(t, vec![ms]))
            }
            Tok::Ident(k) if k == "box" => {
                self.bump();
                self.expect(Tok::LBracket)?;
                let t = self.ty()?;
                self.expect(Tok::RBracket)?;
                let (m, ms) = self.term()?;
                Ok(node(Term::box_t(t, m), vec![ms]))
            }
            _ => self.app(),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Label(_) | Tok::LParen | Tok::LAngle => true,
            Tok::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "apply" | "gate" | "circ"),
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<(Term, SpanTree)> {
        let span = self.span();
        let (mut f, mut fs) = self.atom()?;
        while self.starts_atom() {
            let (a, as_) = self.atom()?;
            f = Term::app(f, a);
            fs = SpanTree { span, children: vec![fs, as_] };
        }
        Ok((f, fs))
    }

    fn atom(&mut self) -> PResult<(Term, SpanTree)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Label(n) => {
                self.bump();
                Ok((Term::Lab(LabelId(n)), SpanTree::leaf(span)))
            }
            Tok::LParen => {
                self.bump();
                let (t, ts) = self.term()?;
                self.expect(Tok::RParen)?;
                Ok((t, ts))
            }
            Tok::LAngle => {
                self.bump();
                let (l, ls) = self.term()?;
                self.expect(Tok::Comma)?;
                let (r, rs) = self.term()?;
                self.expect(Tok::RAngle)?;
                Ok((Term::pair(l, r), SpanTree { span, children: vec![ls, rs] }))
            }
            Tok::Ident(k) if k == "apply" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (c, cs) = self.term()?;
                self.expect(Tok::Comma)?;
                let (a, as_) = self.term()?;
                self.expect(Tok::RParen)?;
                Ok((Term::apply(c, a), SpanTree { span, children: vec![cs, as_] }))
            }
            Tok::Ident(k) if k == "gate" => {
                self.bump();
                let name_span = self.span();
                let name = match self.bump() {
                    Tok::Ident(s) => s,
                    other => {
                        return Err(ParseError { span: name_span, message: format!("expected gate name, found {other}") })
                    }
                };
                let (t, next) = self
                    .sig
                    .gate_literal(&name, LabelId(self.next_label))
                    .map_err(|e| ParseError { span: name_span, message: e.to_string() })?;
                self.next_label = next.0;
                Ok((t, SpanTree::leaf(span)))
            }
            Tok::Ident(k) if k == "circ" => {
                self.bump();
                let t = self.circ_literal()?;
                Ok((t, SpanTree::leaf(span)))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok((Term::Var(x), SpanTree::leaf(span)))
            }
            other => self.fail(format!("expected a term, found {other}")),
        }
    }

    /// `circ(<#0:Qubit, #1:Qubit> | CNOT #0 #1 -> #2 #3; H #2 -> #4 | <#4:Qubit, #3:Qubit>)`
    fn circ_literal(&mut self) -> PResult<Term> {
        let start = self.span();
        self.expect(Tok::LParen)?;
        let mut inputs = LabelContext::new();
        let ins = self.typed_tuple(&mut inputs)?;
        self.expect(Tok::Bar)?;
        let mut gates = Vec::new();
        if *self.peek() != Tok::Bar {
            loop {
                let name = self.ident()?;
                let mut g_ins = Vec::new();
                while let Tok::Label(_) = self.peek() {
                    g_ins.push(self.label()?);
                }
                self.expect(Tok::Arrow)?;
                let mut g_outs = Vec::new();
                while let Tok::Label(_) = self.peek() {
                    g_outs.push(self.label()?);
                }
                gates.push(GateApp { name, ins: g_ins, outs: g_outs });
                if *self.peek() == Tok::Semi {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Bar)?;
        let mut outputs = LabelContext::new();
        let outs = self.typed_tuple(&mut outputs)?;
        self.expect(Tok::RParen)?;
        let c = LabelledCircuit { inputs, gates, outputs };
        c.check_signature(self.sig).map_err(|e| ParseError { span: start, message: e.to_string() })?;
        Ok(Term::boxed(ins, c, outs))
    }

    fn typed_tuple(&mut self, ctx: &mut LabelContext) -> PResult<LabelTuple> {
        if *self.peek() == Tok::LAngle {
            self.bump();
            let a = self.typed_tuple(ctx)?;
            self.expect(Tok::Comma)?;
            let b = self.typed_tuple(ctx)?;
            self.expect(Tok::RAngle)?;
            return Ok(LabelTuple::pair(a, b));
        }
        let span = self.span();
        let l = self.label()?;
        self.expect(Tok::Colon)?;
        let w = self.wire()?;
        if ctx.insert(l, w).is_some() {
            return Err(ParseError { span, message: format!("{l} listed twice") });
        }
        Ok(LabelTuple::Leaf(l))
    }

    fn wire(&mut self) -> PResult<WireType> {
        let span = self.span();
        let name = self.ident()?;
        let w = WireType::new(name);
        if !self.sig.wire_types.contains(&w) {
            return Err(ParseError { span, message: format!("unknown wire type `{w}`") });
        }
        Ok(w)
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        let a = self.tensor_ty()?;
        if *self.peek() == Tok::Lolli {
            self.bump();
            let b = self.ty()?;
            return Ok(TypeExpr::lolli(a, b));
        }
        Ok(a)
    }

    fn tensor_ty(&mut self) -> PResult<TypeExpr> {
        let a = self.unary_ty()?;
        if *self.peek() == Tok::Star {
            self.bump();
            let b = self.tensor_ty()?;
            return Ok(TypeExpr::tensor(a, b));
        }
        Ok(a)
    }

    fn unary_ty(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(TypeExpr::bang(self.unary_ty()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "Circ" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let t = self.ty()?;
                self.expect(Tok::Comma)?;
                let u = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(TypeExpr::circ(t, u))
            }
            Tok::Ident(_) => Ok(TypeExpr::Wire(self.wire()?)),
            other => self.fail(format!("expected a type, found {other}")),
        }
    }
}

pub fn parse(src: &str) -> Result<Term, ParseError> {
    parse_program(src, &GateSignature::default_signature()).map(|p| p.term)
}

pub fn parse_type(src: &str, sig: &GateSignature) -> Result<TypeExpr, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { toks: lexed.toks, pos: 0, sig, next_label: 0 };
    let t = p.ty()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

pub fn parse_program(src: &str, sig: &GateSignature) -> Result<Parsed, ParseError> {
    let lexed = lex(src)?;
    let inputs = match &lexed.pragma {
        Some((text, span)) => Some(parse_inputs(text, *span, sig)?),
        None => None,
    };
    let mut max_label = None;
    for (t, _) in &lexed.toks {
        if let Tok::Label(n) = t {
            max_label = max_label.max(Some(*n));
        }
    }
    if let Some(q) = &inputs {
        max_label = max_label.max(q.max_label().map(|l| l.0));
    }
    let next_label = max_label.map_or(0, |n| n + 1);
    let mut p = Parser { toks: lexed.toks, pos: 0, sig, next_label };
    let (term, spans) = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(Parsed { term, spans, inputs })
}

fn parse_inputs(text: &str, span: Span, sig: &GateSignature) -> Result<LabelContext, ParseError> {
    let toks = lex(text)
        .map_err(|e| ParseError { span, message: format!("in inputs declaration: {}", e.message) })?
        .toks
        .into_iter()
        .map(|(t, _)| (t, span))
        .collect();
    let mut p = Parser { toks, pos: 0, sig, next_label: 0 };
    let mut q = LabelContext::new();
    if *p.peek() == Tok::Eof {
        return Ok(q);
    }
    loop {
        let l = p.label()?;
        p.expect(Tok::Colon)?;
        let w = p.wire()?;
        if q.insert(l, w).is_some() {
            return Err(ParseError { span, message: format!("{l} declared twice") });
        }
        match p.bump() {
            Tok::Comma => continue,
            Tok::Eof => return Ok(q),
            other => return Err(ParseError { span, message: format!("unexpected {other} in inputs declaration") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::term::alpha_eq;

    fn q() -> TypeExpr {
        TypeExpr::qubit()
    }

    #[test]
    fn identity_function() {
        assert_eq!(parse("\\x:Qubit. x").unwrap(), Term::abs("x", q(), Term::var("x")));
    }

    #[test]
    fn gate_sugar_allocates_above_explicit_labels() {
        let t = parse("apply(gate H, #0)").unwrap();
        let (h, _) = GateSignature::default_signature().gate_literal("H", LabelId(1)).unwrap();
        assert_eq!(t, Term::apply(h, Term::Lab(LabelId(0))));
    }

    #[test]
    fn let_of_pair() {
        let t = parse("let <a,b> = <lift \\x:Bit.x, #3> in b").unwrap();
        let expected = Term::let_pair(
            "a",
            "b",
            Term::pair(Term::lift(Term::abs("x", TypeExpr::bit(), Term::var("x"))), Term::Lab(LabelId(3))),
            Term::var("b"),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn application_is_left_associative_and_prefix_forms_extend() {
        let t = parse("f g h").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("g")), Term::var("h")));
        let t = parse("force f x").unwrap();
        assert_eq!(t, Term::force(Term::app(Term::var("f"), Term::var("x"))));
    }

    #[test]
    fn type_precedence() {
        let sig = GateSignature::default_signature();
        let t = parse_type("Qubit * Bit -o Qubit -o Bit", &sig).unwrap();
        assert_eq!(
            t,
            TypeExpr::lolli(
                TypeExpr::tensor(q(), TypeExpr::bit()),
                TypeExpr::lolli(q(), TypeExpr::bit())
            )
        );
        let t = parse_type("!Qubit -o Circ(Qubit, Qubit*Qubit)", &sig).unwrap();
        assert_eq!(t, TypeExpr::lolli(TypeExpr::bang(q()), TypeExpr::circ(q(), TypeExpr::tensor(q(), q()))));
        assert!(parse_type("Qbit", &sig).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("\\x:Qubit.\n  <x, >").unwrap_err();
        assert_eq!(e.span, Span { line: 2, col: 7 });
        let e = parse("gate T").unwrap_err();
        assert!(e.message.contains("unknown gate"), "{e}");
        let e = parse("let <a,a> = #0 in a").unwrap_err();
        assert!(e.message.contains("bound twice"));
    }

    #[test]
    fn comments_and_pragma() {
        let p = parse_program(
            "-- inputs: #0:Qubit, #2:Bit\n<#0, #2> -- trailing\n",
            &GateSignature::default_signature(),
        )
        .unwrap();
        let q = p.inputs.unwrap();
        assert_eq!(q.get(LabelId(2)), Some(&WireType::bit()));
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn circ_literal_round_trip() {
        let src = "circ(<#0:Qubit, #1:Qubit> | CNOT #0 #1 -> #2 #3; H #2 -> #4 | <#4:Qubit, #3:Qubit>)";
        let t = parse(src).unwrap();
        let printed = crate::syntax::pretty(&t);
        assert!(alpha_eq(&parse(&printed).unwrap(), &t));
        assert!(parse("circ(#0:Qubit | H #0 -> #1 | #0:Qubit)").is_err());
    }

    #[test]
    fn spans_follow_term_shape() {
        let p = parse_program("<#0,\n  apply(gate H, #1)>", &GateSignature::default_signature()).unwrap();
        assert_eq!(p.spans.lookup(&[1]), Span { line: 2, col: 3 });
        assert_eq!(p.spans.lookup(&[1, 1]), Span { line: 2, col: 17 });
    }
}
