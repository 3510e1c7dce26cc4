//! Quantifier-free graph formulas over `{E, =}` and their translation to
//! semilattice formulas.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::cograph::{ColorScheme, SimpleGraph};
use crate::error::{Error, Result};
use crate::qf::{Dialect, Formula, Parser, QfFormula, Term};
use crate::rational::{Rational, ScaledMeasure, WeightSum};
use crate::tuples::tuple_count;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphFormula {
    Eq(usize, usize),
    Edge(usize, usize),
    Not(Box<GraphFormula>),
    And(Box<GraphFormula>, Box<GraphFormula>),
    Or(Box<GraphFormula>, Box<GraphFormula>),
}

impl GraphFormula {
    /// Atoms have depth 1; each connective adds 1.
    pub fn depth(&self) -> usize {
        match self {
            GraphFormula::Eq(..) | GraphFormula::Edge(..) => 1,
            GraphFormula::Not(f) => 1 + f.depth(),
            GraphFormula::And(a, b) | GraphFormula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn max_var(&self) -> usize {
        match self {
            GraphFormula::Eq(a, b) | GraphFormula::Edge(a, b) => *a.max(b),
            GraphFormula::Not(f) => f.max_var(),
            GraphFormula::And(a, b) | GraphFormula::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn holds(&self, g: &SimpleGraph, assignment: &[usize]) -> bool {
        let at = |i: &usize| assignment[i - 1];
        match self {
            GraphFormula::Eq(a, b) => at(a) == at(b),
            GraphFormula::Edge(a, b) => g.adjacent(at(a), at(b)),
            GraphFormula::Not(f) => !f.holds(g, assignment),
            GraphFormula::And(a, b) => a.holds(g, assignment) && b.holds(g, assignment),
            GraphFormula::Or(a, b) => a.holds(g, assignment) || b.holds(g, assignment),
        }
    }

    /// Truth value from the equality and adjacency pattern of a tuple.
    fn holds_at(&self, eq: &impl Fn(usize, usize) -> bool, adj: &impl Fn(usize, usize) -> bool) -> bool {
        match self {
            GraphFormula::Eq(a, b) => eq(*a, *b),
            GraphFormula::Edge(a, b) => adj(*a, *b),
            GraphFormula::Not(f) => !f.holds_at(eq, adj),
            GraphFormula::And(a, b) => a.holds_at(eq, adj) && b.holds_at(eq, adj),
            GraphFormula::Or(a, b) => a.holds_at(eq, adj) || b.holds_at(eq, adj),
        }
    }

    fn from_parsed(f: Formula) -> Result<Self> {
        let var = |t: &Term| match t {
            Term::Var(i) => Ok(*i),
            Term::Meet(..) => Err(Error::Input("meet terms are not graph terms".into())),
        };
        Ok(match f {
            Formula::Eq(a, b) => GraphFormula::Eq(var(&a)?, var(&b)?),
            Formula::Color(0, Term::Meet(a, b)) => GraphFormula::Edge(var(&a)?, var(&b)?),
            Formula::Color(..) => return Err(Error::Input("color atoms are not graph atoms".into())),
            Formula::Not(f) => GraphFormula::Not(Box::new(Self::from_parsed(*f)?)),
            Formula::And(a, b) => {
                GraphFormula::And(Box::new(Self::from_parsed(*a)?), Box::new(Self::from_parsed(*b)?))
            }
            Formula::Or(a, b) => {
                GraphFormula::Or(Box::new(Self::from_parsed(*a)?), Box::new(Self::from_parsed(*b)?))
            }
        })
    }
}

impl fmt::Display for GraphFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, g: &GraphFormula, paren: bool| {
            if paren {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        };
        match self {
            GraphFormula::Eq(a, b) => write!(f, "x{a} = x{b}"),
            GraphFormula::Edge(a, b) => write!(f, "E(x{a}, x{b})"),
            GraphFormula::Not(g) => write!(f, "!({g})"),
            GraphFormula::And(a, b) => {
                wrap(f, a, matches!(**a, GraphFormula::Or(..) | GraphFormula::Eq(..)))?;
                write!(f, " & ")?;
                wrap(f, b, !matches!(**b, GraphFormula::Edge(..) | GraphFormula::Not(..)))
            }
            GraphFormula::Or(a, b) => {
                wrap(f, a, matches!(**a, GraphFormula::Eq(..)))?;
                write!(f, " | ")?;
                wrap(f, b, !matches!(**b, GraphFormula::Edge(..) | GraphFormula::Not(..) | GraphFormula::And(..)))
            }
        }
    }
}

/// A graph formula with declared arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphQf {
    pub arity: usize,
    pub body: GraphFormula,
}

impl GraphQf {
    pub fn eval(&self, g: &SimpleGraph, assignment: &[usize]) -> Result<bool> {
        if assignment.len() != self.arity {
            return Err(Error::Arity { expected: self.arity, got: assignment.len() });
        }
        if let Some(&v) = assignment.iter().find(|&&v| v >= g.len()) {
            return Err(Error::Input(format!("vertex {v} out of range")));
        }
        Ok(self.body.holds(g, assignment))
    }

    pub fn depth(&self) -> usize {
        self.body.depth()
    }
}

impl fmt::Display for GraphQf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Parses `E(x1, x2) & !(x1 = x3)` style formulas.
pub fn parse_graph_formula(text: &str, arity: usize) -> Result<GraphQf> {
    let parsed = Parser::new(text, arity, 0, Dialect::Graph)?.parse_all()?;
    let body = GraphFormula::from_parsed(parsed)?;
    debug_assert!(body.max_var() <= arity);
    Ok(GraphQf { arity, body })
}

/// `ψ*`: every `E(s, t)` becomes `Φ(s, t)`, the disjunction over `(i, j, f)`
/// with `f(i, j) = 1` of `M_i(s) & M_j(t) & M_f(s ^ t)`.
pub fn translate_formula(psi: &GraphQf, scheme: &ColorScheme) -> QfFormula {
    QfFormula { arity: psi.arity, body: translate(&psi.body, scheme) }
}

fn translate(f: &GraphFormula, scheme: &ColorScheme) -> Formula {
    match f {
        GraphFormula::Eq(a, b) => Formula::Eq(Term::var(*a), Term::var(*b)),
        GraphFormula::Edge(a, b) => {
            let mut disjuncts = Vec::new();
            for (idx, func) in scheme.functions.iter().enumerate() {
                for i in 1..=scheme.m {
                    for j in 1..=scheme.m {
                        if func.get(i, j) {
                            disjuncts.push(Formula::and(
                                Formula::and(Formula::Color(i, Term::var(*a)), Formula::Color(j, Term::var(*b))),
                                Formula::Color(scheme.function_color(idx), Term::meet(Term::var(*a), Term::var(*b))),
                            ));
                        }
                    }
                }
            }
            disjuncts
                .into_iter()
                .reduce(Formula::or)
                .unwrap_or_else(|| Formula::not(Formula::Eq(Term::var(*a), Term::var(*a))))
        }
        GraphFormula::Not(g) => Formula::not(translate(g, scheme)),
        GraphFormula::And(a, b) => Formula::and(translate(a, scheme), translate(b, scheme)),
        GraphFormula::Or(a, b) => Formula::or(translate(a, scheme), translate(b, scheme)),
    }
}

/// `⟨ψ, G⟩` under the vertex weights of `G`.
pub fn graph_pairing(g: &SimpleGraph, psi: &GraphQf, budget: u128) -> Result<Rational> {
    let p = psi.arity;
    let needed = tuple_count(g.len(), p);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let dist = pattern_distribution(g, p)?;
    Ok(pattern_pairing(&dist, &psi.body, p))
}

/// Masses of `(equality, adjacency)` patterns of `p`-tuples. A pattern is
/// the bitmask over ordered pairs `i < j`: bit `2k` for equality, `2k+1`
/// for adjacency.
fn pattern_distribution(g: &SimpleGraph, p: usize) -> Result<BTreeMap<u64, Rational>> {
    if p > 5 {
        return Err(Error::Input("graph pairings support arity at most 5".into()));
    }
    if g.is_empty() {
        return Err(Error::Input("graph has no vertices".into()));
    }
    let measure = ScaledMeasure::new(&g.weights());
    let nums = &measure.nums;
    let mut sums: BTreeMap<u64, WeightSum> = BTreeMap::new();
    let n = g.len();
    let mut tuple = vec![0usize; p];
    loop {
        let mut key = 0u64;
        let mut bit = 0;
        for i in 0..p {
            for j in i + 1..p {
                if tuple[i] == tuple[j] {
                    key |= 1 << bit;
                }
                if g.adjacent(tuple[i], tuple[j]) {
                    key |= 1 << (bit + 1);
                }
                bit += 2;
            }
        }
        let w: num_bigint::BigUint = tuple.iter().map(|&v| nums[v].clone()).product();
        if !w.is_zero() {
            sums.entry(key).or_default().add_big(&w);
        }
        // Odometer increment.
        let mut i = p;
        loop {
            if i == 0 {
                let denom = measure.denom_pow(p);
                return Ok(sums.into_iter().map(|(k, s)| (k, s.over(&denom))).collect());
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

fn pair_bit(p: usize, a: usize, b: usize) -> usize {
    let (i, j) = (a.min(b) - 1, a.max(b) - 1);
    // Index of pair (i, j) in the order (0,1), (0,2), ..., (1,2), ...
    let before: usize = (0..i).map(|r| p - 1 - r).sum();
    2 * (before + (j - i - 1))
}

fn pattern_holds(f: &GraphFormula, p: usize, key: u64) -> bool {
    let eq = |a: usize, b: usize| a == b || key >> pair_bit(p, a, b) & 1 == 1;
    let adj = |a: usize, b: usize| a != b && key >> (pair_bit(p, a, b) + 1) & 1 == 1;
    f.holds_at(&eq, &adj)
}

fn pattern_pairing(dist: &BTreeMap<u64, Rational>, f: &GraphFormula, p: usize) -> Rational {
    dist.iter().filter(|(k, _)| pattern_holds(f, p, **k)).map(|(_, w)| w.clone()).sum()
}

fn graph_atoms(arity: usize) -> Vec<GraphFormula> {
    if arity == 1 {
        return vec![GraphFormula::Eq(1, 1), GraphFormula::Edge(1, 1)];
    }
    let mut out = Vec::new();
    for i in 1..=arity {
        for j in i + 1..=arity {
            out.push(GraphFormula::Eq(i, j));
            out.push(GraphFormula::Edge(i, j));
        }
    }
    out
}

/// Every formula of depth at most `max_depth` built from the atoms
/// `x_i = x_j`, `E(x_i, x_j)` with `i < j` (for arity 1: `x1 = x1` and
/// `E(x1, x1)`).
pub fn enumerate_graph_formulas(arity: usize, max_depth: usize) -> Vec<GraphQf> {
    let mut levels: Vec<Vec<GraphFormula>> = vec![vec![]];
    if max_depth >= 1 {
        levels.push(graph_atoms(arity));
    }
    for d in 2..=max_depth {
        let below: Vec<GraphFormula> = levels[..d].iter().flatten().cloned().collect();
        let mut next: Vec<GraphFormula> =
            levels[d - 1].iter().map(|f| GraphFormula::Not(Box::new(f.clone()))).collect();
        for a in &below {
            for b in &below {
                if a.depth() == d - 1 || b.depth() == d - 1 {
                    next.push(GraphFormula::And(Box::new(a.clone()), Box::new(b.clone())));
                    next.push(GraphFormula::Or(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
        }
        levels.push(next);
    }
    levels.into_iter().flatten().map(|body| GraphQf { arity, body }).collect()
}

/// One formula per truth table over equality/adjacency patterns, keeping
/// the first of minimal depth. Arity at most 3.
pub fn graph_formula_classes(arity: usize, max_depth: usize) -> Result<Vec<GraphQf>> {
    if arity == 0 || arity > 3 {
        return Err(Error::Input("graph formula classes need arity 1..=3".into()));
    }
    let bits = arity * (arity - 1);
    let mut seen: BTreeMap<u64, GraphQf> = BTreeMap::new();
    for f in enumerate_graph_formulas(arity, max_depth) {
        let mut table = 0u64;
        for key in 0..1u64 << bits {
            if pattern_holds(&f.body, arity, key) {
                table |= 1 << key;
            }
        }
        seen.entry(table).or_insert(f);
    }
    let mut out: Vec<GraphQf> = seen.into_values().collect();
    out.sort_by_key(|f| f.depth());
    Ok(out)
}
