//! Quantifier-free formulas over the signature `{∧, M_1, ..., M_k}`.
//!
//! Text grammar (whitespace is insignificant):
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := lit ('&' lit)*
//! lit     := '!' lit | '(' formula ')' | atom
//! atom    := term '=' term | 'M' INT '(' term ')'
//! term    := factor ('^' factor)*
//! factor  := 'x' INT | '(' term ')'
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::tree::{MeetStructure, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Variable `x_i`, 1-based.
    Var(usize),
    Meet(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn meet(a: Term, b: Term) -> Term {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Meet(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            Term::Var(i) => *i,
            Term::Meet(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn eval<S: MeetStructure + ?Sized>(&self, s: &S, assignment: &[NodeId]) -> NodeId {
        match self {
            Term::Var(i) => assignment[i - 1],
            Term::Meet(a, b) => s.meet(a.eval(s, assignment), b.eval(s, assignment)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    /// `M_i(t)`, 1-based color index.
    Color(usize, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// AST depth: variables count 1, every meet, atom or connective adds 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Eq(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Color(_, t) => 1 + t.depth(),
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            Formula::Eq(a, b) => a.max_var().max(b.max_var()),
            Formula::Color(_, t) => t.max_var(),
            Formula::Not(f) => f.max_var(),
            Formula::And(a, b) | Formula::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn max_color(&self) -> usize {
        match self {
            Formula::Eq(..) => 0,
            Formula::Color(c, _) => *c,
            Formula::Not(f) => f.max_color(),
            Formula::And(a, b) | Formula::Or(a, b) => a.max_color().max(b.max_color()),
        }
    }

    /// Satisfaction without arity checks; `assignment` must cover every
    /// variable used.
    pub fn holds<S: MeetStructure + ?Sized>(&self, s: &S, assignment: &[NodeId]) -> bool {
        match self {
            Formula::Eq(a, b) => a.eval(s, assignment) == b.eval(s, assignment),
            Formula::Color(c, t) => s.colors(t.eval(s, assignment)).contains(*c),
            Formula::Not(f) => !f.holds(s, assignment),
            Formula::And(a, b) => a.holds(s, assignment) && b.holds(s, assignment),
            Formula::Or(a, b) => a.holds(s, assignment) || b.holds(s, assignment),
        }
    }
}

/// A formula together with its declared arity `p` (free variables
/// `x_1..x_p`, not all of which need to occur).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QfFormula {
    pub arity: usize,
    pub body: Formula,
}

impl QfFormula {
    pub fn new(arity: usize, body: Formula) -> Result<Self> {
        if body.max_var() > arity {
            return Err(Error::Input(format!(
                "formula uses x{} but arity is {arity}",
                body.max_var()
            )));
        }
        Ok(QfFormula { arity, body })
    }

    /// `(x1 ^ x2 != x1) & (x1 ^ x2 != x2)`: `x1` and `x2` are incomparable.
    pub fn incomparable_pair() -> Self {
        let m = || Term::meet(Term::var(1), Term::var(2));
        let body = Formula::and(
            Formula::not(Formula::Eq(m(), Term::var(1))),
            Formula::not(Formula::Eq(m(), Term::var(2))),
        );
        QfFormula { arity: 2, body }
    }

    /// `x1 = x1`.
    pub fn tautology() -> Self {
        QfFormula { arity: 1, body: Formula::Eq(Term::var(1), Term::var(1)) }
    }

    pub fn negate(&self) -> Self {
        QfFormula { arity: self.arity, body: Formula::not(self.body.clone()) }
    }

    /// Checked satisfaction: `S ⊨ φ(v_1, ..., v_p)`.
    pub fn eval<S: MeetStructure + ?Sized>(&self, s: &S, assignment: &[NodeId]) -> Result<bool> {
        if assignment.len() != self.arity {
            return Err(Error::Arity { expected: self.arity, got: assignment.len() });
        }
        if let Some(&v) = assignment.iter().find(|&&v| v >= s.node_count()) {
            return Err(Error::Input(format!("node {v} out of range")));
        }
        Ok(self.body.holds(s, assignment))
    }

    pub fn depth(&self) -> usize {
        self.body.depth()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Meet(a, b) => {
                write!(f, "{a} ^ ")?;
                match **b {
                    Term::Meet(..) => write!(f, "({b})"),
                    Term::Var(_) => write!(f, "{b}"),
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Color(c, t) => write!(f, "M{c}({t})"),
            Formula::Not(inner) => {
                if let Formula::Not(_) = **inner {
                    write!(f, "!{inner}")
                } else {
                    write!(f, "!({inner})")
                }
            }
            Formula::And(a, b) => {
                write_operand(f, a, |x| matches!(x, Formula::Or(..)))?;
                write!(f, " & ")?;
                write_operand(f, b, |x| matches!(x, Formula::Or(..) | Formula::And(..)))
            }
            Formula::Or(a, b) => {
                write_operand(f, a, |_| false)?;
                write!(f, " | ")?;
                write_operand(f, b, |x| matches!(x, Formula::Or(..)))
            }
        }
    }
}

fn write_operand(
    f: &mut fmt::Formatter<'_>,
    x: &Formula,
    needs_parens: impl Fn(&Formula) -> bool,
) -> fmt::Result {
    if needs_parens(x) || matches!(x, Formula::Eq(..)) {
        write!(f, "({x})")
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Var(usize),
    Color(usize),
    Edge,
    Meet,
    Eq,
    And,
    Or,
    Not,
    LParen,
    RParen,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'^' => Some(Tok::Meet),
            b'=' => Some(Tok::Eq),
            b'&' => Some(Tok::And),
            b'|' => Some(Tok::Or),
            b'!' => Some(Tok::Not),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
            continue;
        }
        match c {
            b'x' | b'M' => {
                i += 1;
                let ds = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: usize = text[ds..i].parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("expected an index after '{}'", c as char),
                })?;
                out.push((if c == b'x' { Tok::Var(n) } else { Tok::Color(n) }, start));
            }
            b'E' => {
                out.push((Tok::Edge, start));
                i += 1;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character '{}'", text[start..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(out)
}

/// Atom kinds accepted by a parser instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dialect {
    /// `t = t`, `M_i(t)` with meet terms.
    Semilattice,
    /// `x_i = x_j`, `E(x_i, x_j)`; variables only.
    Graph,
}

/// Parser output shared by both dialects: graph adjacency atoms are kept as
/// `Color(0, Meet(x_i, x_j))` placeholders and rewritten by the caller.
pub(crate) struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
    arity: usize,
    k: usize,
    dialect: Dialect,
    _text: &'a str,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str, arity: usize, k: usize, dialect: Dialect) -> Result<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0, len: text.len(), arity, k, dialect, _text: text })
    }

    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    pub(crate) fn parse_all(mut self) -> Result<Formula> {
        let f = self.disj()?;
        if self.pos != self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(f)
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while self.peek() == Some(Tok::Or) {
            self.pos += 1;
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.lit()?;
        while self.peek() == Some(Tok::And) {
            self.pos += 1;
            f = Formula::and(f, self.lit()?);
        }
        Ok(f)
    }

    fn lit(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.lit()?))
            }
            Some(Tok::LParen) => {
                // Either a parenthesized formula or an atom whose left term
                // is parenthesized; try the formula first and backtrack.
                let save = self.pos;
                self.pos += 1;
                if let Ok(f) = self.disj() {
                    if self.peek() == Some(Tok::RParen) {
                        self.pos += 1;
                        if self.peek() != Some(Tok::Eq) && self.peek() != Some(Tok::Meet) {
                            return Ok(f);
                        }
                    }
                }
                self.pos = save;
                self.atom()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Color(c)) => {
                if self.dialect == Dialect::Graph {
                    return self.err("color atoms are not part of the graph language");
                }
                if c == 0 || c > self.k {
                    return self.err(format!("color index M{c} outside 1..={}", self.k));
                }
                self.pos += 1;
                self.expect(Tok::LParen, "'(' after color")?;
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Formula::Color(c, t))
            }
            Some(Tok::Edge) => {
                if self.dialect != Dialect::Graph {
                    return self.err("adjacency atoms are only part of the graph language");
                }
                self.pos += 1;
                self.expect(Tok::LParen, "'(' after E")?;
                let a = self.term()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Formula::Color(0, Term::meet(a, b)))
            }
            _ => {
                let a = self.term()?;
                self.expect(Tok::Eq, "'='")?;
                let b = self.term()?;
                Ok(Formula::Eq(a, b))
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.factor()?;
        while self.peek() == Some(Tok::Meet) {
            if self.dialect == Dialect::Graph {
                return self.err("meet terms are not part of the graph language");
            }
            self.pos += 1;
            t = Term::meet(t, self.factor()?);
        }
        Ok(t)
    }

    fn factor(&mut self) -> Result<Term> {
        match self.peek() {
            Some(Tok::Var(i)) => {
                if i == 0 || i > self.arity {
                    return self.err(format!("variable x{i} outside x1..x{}", self.arity));
                }
                self.pos += 1;
                Ok(Term::Var(i))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.err("expected a variable or '('"),
        }
    }
}

/// Parses a formula of the given arity over `k` colors.
pub fn parse_formula(text: &str, arity: usize, k: usize) -> Result<QfFormula> {
    let body = Parser::new(text, arity, k, Dialect::Semilattice)?.parse_all()?;
    Ok(QfFormula { arity, body })
}

/// Largest variable index mentioned in `text`, used to infer an arity.
pub fn infer_arity(text: &str) -> Result<usize> {
    Ok(lex(text)?
        .iter()
        .filter_map(|(t, _)| if let Tok::Var(i) = t { Some(*i) } else { None })
        .max()
        .unwrap_or(1))
}
