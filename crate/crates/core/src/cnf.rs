//! Clausal forms.
//!
//! [`cnf_standard`] is the textbook conversion: eliminate `->` and `<->`,
//! push negations inward, distribute disjunction over conjunction. It keeps
//! every clause the distribution produces, tautologies and duplicates
//! included, so its clause count under an assignment is exactly the score
//! computed by [`crate::score`]. The rewrite conventions are fixed:
//!
//! ```text
//! a -> b      =>  !a | b
//! a <-> b     =>  (!a | b) & (!b | a)
//! !(a <-> b)  =>  (a | b) & (!a | !b)
//! ```
//!
//! [`cnf_definitional`] names subformulas with fresh variables and stays
//! polynomial in the input size.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::formula::{Assignment, Formula, Lit, Node, NodeId, Var};

/// Default bound on the number of clauses [`cnf_standard`] will build.
pub const DEFAULT_CLAUSE_GUARD: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("standard conversion would produce {estimated} clauses, above the limit of {limit}")]
    GuardExceeded { estimated: BigUint, limit: u64 },
    #[error("assignment covers {found} variables but the clause set has {expected}")]
    AssignmentLength { expected: usize, found: usize },
}

/// A disjunction of literals, kept sorted with duplicates removed. The empty
/// clause is false under every assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Clause {
        lits.sort_unstable();
        lits.dedup();
        Clause(lits)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_falsified(&self, assignment: &Assignment) -> bool {
        self.0.iter().all(|l| !l.eval(assignment))
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

/// An ordered list of clauses over variables `0 .. num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseSet {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl ClauseSet {
    /// Panics if a literal mentions a variable at or above `num_vars`.
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> ClauseSet {
        for c in &clauses {
            for l in c.lits() {
                assert!(l.var().index() < num_vars, "literal {l} outside {num_vars} variables");
            }
        }
        ClauseSet { num_vars, clauses }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Total number of literal occurrences.
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// DIMACS CNF text, preceded by `comments` as `c` lines.
    pub fn to_dimacs(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "c {c}");
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for l in clause.lits() {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Number of clauses of `cs` falsified by `assignment`.
pub fn count_false_clauses(cs: &ClauseSet, assignment: &Assignment) -> Result<usize, CnfError> {
    if assignment.len() != cs.num_vars {
        return Err(CnfError::AssignmentLength { expected: cs.num_vars, found: assignment.len() });
    }
    Ok(cs.clauses.iter().filter(|c| c.is_falsified(assignment)).count())
}

/// Clause counts of the standard conversion of `f` and of `!f`, computed
/// without building either.
pub fn clause_counts(f: &Formula) -> (BigUint, BigUint) {
    let mut counts: Vec<(BigUint, BigUint)> = Vec::with_capacity(f.size());
    for node in f.nodes() {
        let c = |id: NodeId| &counts[id];
        let pair = match node {
            Node::Lit(_) => (BigUint::one(), BigUint::one()),
            Node::Const(true) => (BigUint::zero(), BigUint::one()),
            Node::Const(false) => (BigUint::one(), BigUint::zero()),
            Node::Not(x) => (c(*x).1.clone(), c(*x).0.clone()),
            Node::And(xs) => (xs.iter().map(|&x| &c(x).0).sum(), xs.iter().map(|&x| &c(x).1).product()),
            Node::Or(xs) => (xs.iter().map(|&x| &c(x).0).product(), xs.iter().map(|&x| &c(x).1).sum()),
            Node::Implies(a, b) => (&c(*a).1 * &c(*b).0, &c(*a).0 + &c(*b).1),
            Node::Iff(a, b) => {
                let (a, b) = (c(*a), c(*b));
                (&a.1 * &b.0 + &b.1 * &a.0, &a.0 * &b.0 + &a.1 * &b.1)
            }
        };
        counts.push(pair);
    }
    counts.swap_remove(f.root())
}

/// Standard conversion with the default clause guard.
pub fn cnf_standard(f: &Formula) -> Result<ClauseSet, CnfError> {
    cnf_standard_with_guard(f, DEFAULT_CLAUSE_GUARD)
}

/// Standard conversion, refusing to build more than `limit` clauses.
pub fn cnf_standard_with_guard(f: &Formula, limit: u64) -> Result<ClauseSet, CnfError> {
    let (estimated, _) = clause_counts(f);
    if estimated.to_u64().is_none_or(|n| n > limit) {
        return Err(CnfError::GuardExceeded { estimated, limit });
    }
    let raw = standard(f, f.root(), true);
    Ok(ClauseSet { num_vars: f.num_vars(), clauses: raw.into_iter().map(Clause::new).collect() })
}

type RawClauses = Vec<Vec<Lit>>;

fn cross(lhs: RawClauses, rhs: &RawClauses) -> RawClauses {
    let mut out = Vec::with_capacity(lhs.len() * rhs.len());
    for a in &lhs {
        for b in rhs {
            let mut c = a.clone();
            c.extend_from_slice(b);
            out.push(c);
        }
    }
    out
}

/// Clauses of the conversion of the node (`positive`) or of its negation.
fn standard(f: &Formula, id: NodeId, positive: bool) -> RawClauses {
    // Conjunction of the parts: concatenate. Disjunction: cross product.
    let conj = |parts: Vec<RawClauses>| parts.into_iter().flatten().collect::<RawClauses>();
    let disj = |parts: Vec<RawClauses>| parts.into_iter().fold(vec![Vec::new()], |acc, p| cross(acc, &p));
    match f.node(id) {
        Node::Lit(l) => vec![vec![if positive { *l } else { !*l }]],
        Node::Const(b) => {
            if *b == positive {
                Vec::new()
            } else {
                vec![Vec::new()]
            }
        }
        Node::Not(c) => standard(f, *c, !positive),
        Node::And(cs) => {
            let parts = cs.iter().map(|&c| standard(f, c, positive)).collect();
            if positive {
                conj(parts)
            } else {
                disj(parts)
            }
        }
        Node::Or(cs) => {
            let parts = cs.iter().map(|&c| standard(f, c, positive)).collect();
            if positive {
                disj(parts)
            } else {
                conj(parts)
            }
        }
        Node::Implies(a, b) => {
            if positive {
                disj(vec![standard(f, *a, false), standard(f, *b, true)])
            } else {
                conj(vec![standard(f, *a, true), standard(f, *b, false)])
            }
        }
        Node::Iff(a, b) => {
            let (a, b) = (*a, *b);
            if positive {
                conj(vec![
                    disj(vec![standard(f, a, false), standard(f, b, true)]),
                    disj(vec![standard(f, b, false), standard(f, a, true)]),
                ])
            } else {
                conj(vec![
                    disj(vec![standard(f, a, true), standard(f, b, true)]),
                    disj(vec![standard(f, a, false), standard(f, b, false)]),
                ])
            }
        }
    }
}

/// Output of the definitional conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definitional {
    pub clauses: ClauseSet,
    /// Variables of the input formula; fresh variables follow them, so a
    /// model restricts to the input by taking this prefix.
    pub num_original: usize,
    /// Each fresh variable and the node it names.
    pub fresh: Vec<(Var, NodeId)>,
}

impl Definitional {
    pub fn num_fresh(&self) -> usize {
        self.fresh.len()
    }

    /// DIMACS variable number of each fresh variable mapped to the infix text
    /// of the subformula it stands for.
    pub fn name_map(&self, f: &Formula) -> BTreeMap<String, String> {
        self.fresh.iter().map(|&(v, id)| ((v.index() + 1).to_string(), f.render_at(id))).collect()
    }
}

/// Structure-preserving conversion. With `polarity_optimized`, each
/// subformula is defined only in the direction(s) in which it occurs;
/// otherwise both implications are emitted for every definition.
pub fn cnf_definitional(f: &Formula, polarity_optimized: bool) -> Definitional {
    let mut d =
        Definer { f, both: !polarity_optimized, next: f.num_vars() as u32, clauses: Vec::new(), fresh: Vec::new() };
    d.assert_top(f.root());
    Definitional {
        clauses: ClauseSet { num_vars: d.next as usize, clauses: d.clauses },
        num_original: f.num_vars(),
        fresh: d.fresh,
    }
}

struct Definer<'f> {
    f: &'f Formula,
    both: bool,
    next: u32,
    clauses: Vec<Clause>,
    fresh: Vec<(Var, NodeId)>,
}

impl Definer<'_> {
    fn emit(&mut self, lits: Vec<Lit>) {
        self.clauses.push(Clause::new(lits));
    }

    fn assert_top(&mut self, id: NodeId) {
        match self.f.node(id) {
            Node::And(cs) => cs.clone().into_iter().for_each(|c| self.assert_top(c)),
            Node::Or(cs) => {
                let lits = cs.clone().into_iter().map(|c| self.name(c, true, false)).collect();
                self.emit(lits);
            }
            Node::Const(true) => {}
            Node::Const(false) => self.emit(Vec::new()),
            _ => {
                let l = self.name(id, true, false);
                self.emit(vec![l]);
            }
        }
    }

    /// A literal equivalent to the node wherever it occurs with the given
    /// polarities.
    fn name(&mut self, id: NodeId, pos: bool, neg: bool) -> Lit {
        let (pos, neg) = if self.both { (true, true) } else { (pos, neg) };
        let node = self.f.node(id).clone();
        match node {
            Node::Lit(l) => l,
            Node::Not(c) => !self.name(c, neg, pos),
            Node::Const(b) => {
                let x = self.fresh_var(id);
                self.emit(vec![x.lit(b)]);
                x.lit(true)
            }
            Node::And(cs) | Node::Or(cs) => {
                let is_and = matches!(self.f.node(id), Node::And(_));
                let kids: Vec<Lit> = cs.iter().map(|&c| self.name(c, pos, neg)).collect();
                let x = self.fresh_var(id).lit(true);
                if is_and {
                    if pos {
                        kids.iter().for_each(|&k| self.emit(vec![!x, k]));
                    }
                    if neg {
                        let mut c: Vec<Lit> = kids.iter().map(|&k| !k).collect();
                        c.push(x);
                        self.emit(c);
                    }
                } else {
                    if pos {
                        let mut c = kids.clone();
                        c.push(!x);
                        self.emit(c);
                    }
                    if neg {
                        kids.iter().for_each(|&k| self.emit(vec![x, !k]));
                    }
                }
                x
            }
            Node::Implies(a, b) => {
                let a = self.name(a, neg, pos);
                let b = self.name(b, pos, neg);
                let x = self.fresh_var(id).lit(true);
                if pos {
                    self.emit(vec![!x, !a, b]);
                }
                if neg {
                    self.emit(vec![x, a]);
                    self.emit(vec![x, !b]);
                }
                x
            }
            Node::Iff(a, b) => {
                let a = self.name(a, true, true);
                let b = self.name(b, true, true);
                let x = self.fresh_var(id).lit(true);
                if pos {
                    self.emit(vec![!x, !a, b]);
                    self.emit(vec![!x, !b, a]);
                }
                if neg {
                    self.emit(vec![x, a, b]);
                    self.emit(vec![x, !a, !b]);
                }
                x
            }
        }
    }

    fn fresh_var(&mut self, id: NodeId) -> Var {
        let v = Var(self.next);
        self.next += 1;
        self.fresh.push((v, id));
        v
    }
}
