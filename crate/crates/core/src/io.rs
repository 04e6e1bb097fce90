//! Graph files, algebra expressions and report number formatting.
//!
//! Graph files are line oriented:
//!
//! ```text
//! # comment
//! vertex v1
//! vertex v2
//! edge t v1 v2      # edge <id> <source> <range>
//! ```
//!
//! Note the order on `edge` lines: identifier, then **source**, then
//! **range**. Identifiers match `[A-Za-z_][A-Za-z0-9_]*`.
//!
//! Expressions are sums of scalar multiples of words:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := scalar '*' word | word | scalar
//! word   := letter ('.' letter)*
//! letter := id ['~']
//! scalar := part | '(' ['+'|'-'] part (('+'|'-') part)* ')' ['i']
//! part   := rational ['i'] | 'i'
//! rational := int ['/' int]
//! ```
//!
//! `~` selects the reversed partner of an edge and is only valid over a
//! doubled graph. A bare scalar stands for a multiple of the unit, which
//! exists only for single-vertex graphs.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serializer;
use thiserror::Error;

use crate::algebra::{AlgebraElement, Scalar};
use crate::graph::{Carrier, DirectedMultigraph, Letter, PARTNER_SUFFIX};
use crate::words::semigroup_identity;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("identifier `{0}` declared twice")]
    DuplicateId(String),
    #[error("edge `{edge}` refers to undeclared vertex `{vertex}`")]
    UnknownEndpoint { edge: String, vertex: String },
    #[error("graph declares no vertices")]
    EmptyGraph,
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("`{PARTNER_SUFFIX}` is only meaningful over a doubled graph")]
    AdjointOnUndoubled,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("a bare scalar needs a unit, which only single-vertex graphs have")]
    NoUnit,
}

/// A rejection with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Where a vertex or edge was declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDocument {
    pub source: String,
    pub graph: DirectedMultigraph,
    pub vertex_spans: Vec<Span>,
    pub edge_spans: Vec<Span>,
}

fn is_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Whitespace-separated fields of a line with their 1-based columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((line[..s].chars().count() + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

pub fn parse_graph(text: &str) -> Result<GraphDocument, ParseError> {
    let err = |line, column, kind| ParseError { line, column, kind };
    let mut vertices: Vec<String> = Vec::new();
    let mut vertex_spans = Vec::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut edge_spans = Vec::new();
    let mut seen: HashMap<String, Span> = HashMap::new();
    let mut pending_edges = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let f = fields(content);
        let Some(&(col, keyword)) = f.first() else { continue };
        let arity = match keyword {
            "vertex" => 1,
            "edge" => 3,
            _ => {
                return Err(err(line, col, ParseErrorKind::Syntax(format!(
                    "expected `vertex` or `edge`, found `{keyword}`"
                ))))
            }
        };
        if f.len() != arity + 1 {
            let at = f.get(arity + 1).map_or(raw.chars().count() + 1, |x| x.0);
            return Err(err(line, at, ParseErrorKind::Syntax(format!(
                "`{keyword}` takes {arity} identifier{}",
                if arity == 1 { "" } else { "s" }
            ))));
        }
        for &(c, id) in &f[1..] {
            if !is_id(id) {
                return Err(err(line, c, ParseErrorKind::Syntax(format!("invalid identifier `{id}`"))));
            }
        }
        let (id_col, id) = f[1];
        if seen.insert(id.to_string(), Span { line, column: id_col }).is_some() {
            return Err(err(line, id_col, ParseErrorKind::DuplicateId(id.into())));
        }
        if keyword == "vertex" {
            vertices.push(id.into());
            vertex_spans.push(Span { line, column: col });
        } else {
            edges.push((id.into(), f[2].1.into(), f[3].1.into()));
            edge_spans.push(Span { line, column: col });
            pending_edges.push((line, [f[2], f[3]]));
        }
    }
    // endpoints may be declared after the edge that uses them
    for ((line, ends), (id, _, _)) in pending_edges.iter().zip(&edges) {
        for &(c, v) in ends {
            if !vertices.iter().any(|x| x == v) {
                return Err(err(*line, c, ParseErrorKind::UnknownEndpoint {
                    edge: id.clone(),
                    vertex: v.into(),
                }));
            }
        }
    }
    if vertices.is_empty() {
        return Err(err(1, 1, ParseErrorKind::EmptyGraph));
    }
    let graph = DirectedMultigraph::new(vertices, edges)
        .map_err(|e| err(1, 1, ParseErrorKind::Syntax(e.to_string())))?;
    Ok(GraphDocument {
        source: text.to_string(),
        graph,
        vertex_spans,
        edge_spans,
    })
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn position(&self, at: usize) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for &c in &self.chars[..at.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn error_at(&self, at: usize, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.position(at);
        ParseError { line, column, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.pos, ParseErrorKind::Syntax(msg.into()))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    /// Next non-whitespace character, without consuming it.
    fn peek_token(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek_token() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("ascii digits"))
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return None;
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some((start, self.chars[start..self.pos].iter().collect()))
    }

    /// Whether an `i` at the cursor is the imaginary unit rather than the
    /// start of a longer identifier.
    fn at_lone_i(&mut self) -> bool {
        self.skip_ws();
        self.peek() == Some('i')
            && !self
                .chars
                .get(self.pos + 1)
                .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == PARTNER_SUFFIX)
    }
}

fn imag_unit() -> Scalar {
    Scalar::new(BigRational::zero(), BigRational::one())
}

fn parse_part(cur: &mut Cursor) -> Result<Scalar, ParseError> {
    if cur.at_lone_i() {
        cur.pos += 1;
        return Ok(imag_unit());
    }
    let num = cur.int()?;
    let start = cur.pos;
    let value = if cur.eat('/') {
        let den = cur.int()?;
        if den.is_zero() {
            return Err(cur.error_at(start, ParseErrorKind::ZeroDenominator));
        }
        BigRational::new(num, den)
    } else {
        BigRational::from_integer(num)
    };
    if cur.at_lone_i() {
        cur.pos += 1;
        return Ok(Scalar::new(BigRational::zero(), value));
    }
    Ok(Scalar::new(value, BigRational::zero()))
}

fn parse_scalar(cur: &mut Cursor) -> Result<Scalar, ParseError> {
    if !cur.eat('(') {
        return parse_part(cur);
    }
    let mut total = Scalar::zero();
    let mut first = true;
    loop {
        let negative = cur.eat('-');
        if !negative && !cur.eat('+') && !first {
            return Err(cur.syntax("expected `+`, `-` or `)`"));
        }
        let part = parse_part(cur)?;
        total = if negative { total - part } else { total + part };
        first = false;
        if cur.eat(')') {
            break;
        }
        if !matches!(cur.peek_token(), Some('+' | '-')) {
            return Err(cur.syntax("expected `+`, `-` or `)`"));
        }
    }
    if cur.at_lone_i() {
        cur.pos += 1;
        total *= imag_unit();
    }
    Ok(total)
}

fn parse_word(cur: &mut Cursor, carrier: &Carrier) -> Result<Vec<Letter>, ParseError> {
    let mut letters = Vec::new();
    loop {
        let Some((start, mut name)) = cur.ident() else {
            return Err(cur.syntax("expected a letter"));
        };
        if cur.peek() == Some(PARTNER_SUFFIX) {
            cur.pos += 1;
            if !carrier.is_doubled() {
                return Err(cur.error_at(start, ParseErrorKind::AdjointOnUndoubled));
            }
            name.push(PARTNER_SUFFIX);
        }
        let letter = carrier
            .graph()
            .letter(&name)
            .ok_or_else(|| cur.error_at(start, ParseErrorKind::UnknownLetter(name)))?;
        letters.push(letter);
        if !cur.eat('.') {
            return Ok(letters);
        }
    }
}

fn parse_term(cur: &mut Cursor, carrier: &Carrier) -> Result<AlgebraElement, ParseError> {
    let start = {
        cur.skip_ws();
        cur.pos
    };
    let starts_scalar = match cur.peek() {
        Some('(') => true,
        Some(c) if c.is_ascii_digit() => true,
        // a lone `i` is a letter when the graph has one by that name
        Some('i') => cur.at_lone_i() && carrier.graph().letter("i").is_none(),
        _ => false,
    };
    let (coefficient, letters) = if starts_scalar {
        let c = parse_scalar(cur)?;
        if cur.eat('*') {
            (c, Some(parse_word(cur, carrier)?))
        } else {
            (c, None)
        }
    } else {
        (Scalar::one(), Some(parse_word(cur, carrier)?))
    };
    let letters = match letters {
        Some(l) => l,
        None if coefficient.is_zero() => return Ok(AlgebraElement::zero(carrier)),
        None => match semigroup_identity(carrier.graph()) {
            Some(unit) => unit.letters().to_vec(),
            None => return Err(cur.error_at(start, ParseErrorKind::NoUnit)),
        },
    };
    AlgebraElement::term(carrier, coefficient, &letters)
        .map_err(|e| cur.error_at(start, ParseErrorKind::Syntax(e.to_string())))
}

/// Parses an expression over `carrier` into an exact algebra element.
pub fn parse_expr(text: &str, carrier: &Carrier) -> Result<AlgebraElement, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        pos: 0,
    };
    let mut total = AlgebraElement::zero(carrier);
    let mut negative = cur.eat('-') || {
        cur.eat('+');
        false
    };
    loop {
        let term = parse_term(&mut cur, carrier)?;
        let term = if negative { term.neg() } else { term };
        total = total.add(&term).expect("same carrier");
        match cur.peek_token() {
            None => return Ok(total),
            Some('+') => negative = false,
            Some('-') => negative = true,
            Some(c) => return Err(cur.syntax(format!("unexpected `{c}`"))),
        }
        cur.pos += 1;
    }
}

/// Parses a standalone complex number such as `0.5`, `-i`, `1/2+1/3i` or
/// `0.25-0.5i`. Decimals are converted exactly.
pub fn parse_scalar_literal(text: &str) -> Result<Scalar, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        pos: 0,
    };
    let mut total = Scalar::zero();
    let mut negative = cur.eat('-') || {
        cur.eat('+');
        false
    };
    loop {
        let part = if cur.at_lone_i() {
            cur.pos += 1;
            imag_unit()
        } else {
            let value = decimal(&mut cur)?;
            if cur.at_lone_i() {
                cur.pos += 1;
                Scalar::new(BigRational::zero(), value)
            } else {
                Scalar::new(value, BigRational::zero())
            }
        };
        total = if negative { total - part } else { total + part };
        match cur.peek_token() {
            None => return Ok(total),
            Some('+') => negative = false,
            Some('-') => negative = true,
            Some(c) => return Err(cur.syntax(format!("unexpected `{c}`"))),
        }
        cur.pos += 1;
    }
}

fn decimal(cur: &mut Cursor) -> Result<BigRational, ParseError> {
    let whole = cur.int()?;
    let start = cur.pos;
    if cur.peek() == Some('.') {
        cur.pos += 1;
        let digits_at = cur.pos;
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.pos += 1;
        }
        if digits_at == cur.pos {
            return Err(cur.syntax("expected digits after `.`"));
        }
        let frac: String = cur.chars[digits_at..cur.pos].iter().collect();
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let num = whole * &scale + frac.parse::<BigInt>().expect("ascii digits");
        return Ok(BigRational::new(num, scale));
    }
    if cur.eat('/') {
        let den = cur.int()?;
        if den.is_zero() {
            return Err(cur.error_at(start, ParseErrorKind::ZeroDenominator));
        }
        return Ok(BigRational::new(whole, den));
    }
    Ok(BigRational::from_integer(whole))
}

/// Rounds to 12 significant digits, the precision used in reports.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn serialize_sig12<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig12(*x))
}

pub fn serialize_opt_sig12<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig12(*v)),
        None => s.serialize_none(),
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rational, real, scalar};
    use crate::catalog;
    use proptest::prelude::*;

    const EXAMPLE: &str = "\
# two loops and a bridge
vertex v1
vertex v2
vertex v3
edge t1 v1 v1
edge t2 v1 v1
edge t3 v1 v2   # source v1, range v2
";

    #[test]
    fn parses_the_small_examples() {
        let d = parse_graph("vertex v1\nvertex v2\nedge t v1 v2").unwrap();
        let e = d.graph.edge(0);
        assert_eq!((e.source, e.range), (0, 1));
        let d = parse_graph(EXAMPLE).unwrap();
        assert_eq!(d.graph, catalog::loops_and_bridge());
        assert_eq!(d.edge_spans[2], Span { line: 7, column: 1 });
    }

    #[test]
    fn graph_display_reparses() {
        for seed in 0..20 {
            let q = catalog::random_graph(seed, 6, 10);
            assert_eq!(parse_graph(&q.to_string()).unwrap().graph, q);
        }
    }

    #[test]
    fn graph_errors_are_positioned() {
        let e = parse_graph("edge t v1 v2").unwrap_err();
        assert_eq!((e.line, e.column), (1, 8));
        assert!(matches!(e.kind, ParseErrorKind::UnknownEndpoint { .. }));
        let e = parse_graph("vertex a\nvertex a").unwrap_err();
        assert_eq!((e.line, e.column, e.kind), (2, 8, ParseErrorKind::DuplicateId("a".into())));
        let e = parse_graph("# nothing\n\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::EmptyGraph);
        let e = parse_graph("vertex a\nnode b").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_graph("vertex a\n  edge x a").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_graph("vertex 1a").unwrap_err();
        assert_eq!((e.line, e.column), (1, 8));
        let e = parse_graph("vertex a~").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn expression_examples() {
        let c = Carrier::plain(catalog::loops_and_bridge());
        let x = parse_expr("v1", &c).unwrap();
        assert_eq!(x, AlgebraElement::named(&c, "v1").unwrap());
        let y = parse_expr("1/2 * t1.t3 + (0-1) i * v3", &c).unwrap();
        assert_eq!(y.len(), 2);
        let w = |s| crate::words::parse_word(c.graph(), s).unwrap();
        assert_eq!(y.coefficient(&w("t1.t3")), scalar(rational(1, 2), rational(0, 1)));
        assert_eq!(y.coefficient(&w("v3")), scalar(rational(0, 1), rational(-1, 1)));
        let d = Carrier::doubled_of(catalog::loops_and_bridge());
        let t = parse_expr("t3~", &d).unwrap();
        assert_eq!(t.terms().next().unwrap().0.letters(), &[d.graph().letter("t3~").unwrap()]);
    }

    #[test]
    fn scalar_forms() {
        let c = Carrier::plain(catalog::single_edge());
        let v = |s: &str| parse_expr(s, &c).unwrap().coefficient(&crate::words::parse_word(c.graph(), "v0").unwrap());
        assert_eq!(v("3 * v0"), real(3));
        assert_eq!(v("- 2/4 * v0"), scalar(rational(-1, 2), rational(0, 1)));
        assert_eq!(v("i*v0"), scalar(rational(0, 1), rational(1, 1)));
        assert_eq!(v("(1+i) * v0"), scalar(rational(1, 1), rational(1, 1)));
        assert_eq!(v("(2-3/4i) * v0"), scalar(rational(2, 1), rational(-3, 4)));
        assert_eq!(v("(1 + 2i) i * v0"), scalar(rational(-2, 1), rational(1, 1)));
        assert_eq!(v("5i * v0 - 5 i * v0"), real(0));
        assert_eq!(v("v0 + v0"), real(2));
    }

    #[test]
    fn expression_errors() {
        let c = Carrier::plain(catalog::single_edge());
        let kind = |s| parse_expr(s, &c).unwrap_err().kind;
        assert_eq!(kind("t~"), ParseErrorKind::AdjointOnUndoubled);
        assert_eq!(kind("w"), ParseErrorKind::UnknownLetter("w".into()));
        assert_eq!(kind("1/0 * t"), ParseErrorKind::ZeroDenominator);
        assert_eq!(kind("3"), ParseErrorKind::NoUnit);
        assert!(matches!(kind("t +"), ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("t t"), ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("(1 2)"), ParseErrorKind::Syntax(_)));
        assert!(matches!(kind(""), ParseErrorKind::Syntax(_)));
        let e = parse_expr("v0 +\n  q", &c).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        // zero scalars need no unit, and the single-vertex unit is available
        assert!(parse_expr("0", &c).unwrap().is_zero());
        let one = Carrier::plain(DirectedMultigraph::new(["p"], [("l", "p", "p")]).unwrap());
        assert_eq!(parse_expr("2 - 2 * p", &one).unwrap().len(), 0);
    }

    #[test]
    fn letter_named_i_wins_over_unit() {
        let q = DirectedMultigraph::new(["i", "j"], [("e", "i", "j")]).unwrap();
        let c = Carrier::plain(q);
        assert_eq!(parse_expr("i", &c).unwrap(), AlgebraElement::named(&c, "i").unwrap());
        let x = parse_expr("2 i * j", &c).unwrap();
        assert_eq!(x.coefficient(&crate::words::parse_word(c.graph(), "j").unwrap()), scalar(rational(0, 1), rational(2, 1)));
    }

    #[test]
    fn scalar_literals() {
        let lit = |s| parse_scalar_literal(s).unwrap();
        assert_eq!(lit("0.5"), scalar(rational(1, 2), rational(0, 1)));
        assert_eq!(lit("i"), scalar(rational(0, 1), rational(1, 1)));
        assert_eq!(lit("-i"), scalar(rational(0, 1), rational(-1, 1)));
        assert_eq!(lit("1/2+1/3i"), scalar(rational(1, 2), rational(1, 3)));
        assert_eq!(lit(" 0.25 - 0.5i"), scalar(rational(1, 4), rational(-1, 2)));
        assert_eq!(lit("3"), real(3));
        for bad in ["", "1.", "1/0", "x", "1 2", "0.5j"] {
            assert!(parse_scalar_literal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sig12_rounding() {
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(2.0), 2.0);
        assert_eq!(round_sig12(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,40}") {
            let c = Carrier::doubled_of(catalog::loops_and_bridge());
            let _ = parse_expr(&s, &c);
            let _ = parse_graph(&s);
        }

        #[test]
        fn structured_noise_never_panics(s in "[ vertxdgeab12~#\\n.*+()/i-]{0,60}") {
            let c = Carrier::plain(catalog::single_edge());
            let _ = parse_expr(&s, &c);
            let _ = parse_graph(&s);
        }
    }
}
