//! Propositional formulas: variables, literals, assignments and the
//! arena-backed formula tree shared by every other module.
//!
//! Formulas are built from an [`Expr`] tree and stored as a [`Formula`], a
//! post-order arena in which every child precedes its parent. Conjunctions and
//! disjunctions are flattened into n-ary nodes and a negated variable is folded
//! into a single literal leaf, so the arena is the canonical shape that the
//! score engine, the converters and the oracle all agree on.

mod dimacs;
mod parse;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use dimacs::{parse_dimacs, DimacsError};
pub use parse::{parse_formula, ParseError};

/// A propositional variable, identified by a dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A variable together with a sign, packed as `2 * var + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Truth value of the literal under `assignment`.
    #[inline]
    pub fn eval(self, assignment: &Assignment) -> bool {
        assignment.get(self.var()) == self.is_positive()
    }

    /// DIMACS encoding: 1-based variable, negative when negated.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "¬{}", self.var())
        }
    }
}

/// A total truth assignment, one bit per variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(len: usize, value: bool) -> Self {
        Assignment(vec![value; len])
    }

    /// The assignment whose bit for variable `j` is bit `len - 1 - j` of
    /// `index`, so that counting `index` upward enumerates assignments in
    /// lexicographic order with variable 0 most significant.
    pub fn from_index(len: usize, index: u64) -> Self {
        Assignment((0..len).map(|j| index >> (len - 1 - j) & 1 == 1).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, var: Var) -> bool {
        self.0[var.index()]
    }

    #[inline]
    pub fn set(&mut self, var: Var, value: bool) {
        self.0[var.index()] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: Var) {
        let bit = &mut self.0[var.index()];
        *bit = !*bit;
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    /// A copy with `var` flipped.
    pub fn flipped(&self, var: Var) -> Self {
        let mut out = self.clone();
        out.flip(var);
        out
    }

    /// Restriction to the first `len` variables.
    pub fn prefix(&self, len: usize) -> Self {
        Assignment(self.0[..len].to_vec())
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(values: Vec<bool>) -> Self {
        Assignment(values)
    }
}

/// Owned formula tree, convenient for construction. Converted into the
/// canonical arena form by [`Formula::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(Var),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Const(bool),
}

impl Expr {
    pub fn var(index: u32) -> Expr {
        Expr::Var(Var(index))
    }

    pub fn lit(lit: Lit) -> Expr {
        let v = Expr::Var(lit.var());
        if lit.is_positive() {
            v
        } else {
            Expr::negate(v)
        }
    }

    pub fn negate(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(children: Vec<Expr>) -> Expr {
        Expr::And(children)
    }

    pub fn or(children: Vec<Expr>) -> Expr {
        Expr::Or(children)
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Iff(Box::new(lhs), Box::new(rhs))
    }

    fn max_var(&self) -> Option<u32> {
        match self {
            Expr::Var(v) => Some(v.0),
            Expr::Not(c) => c.max_var(),
            Expr::And(cs) | Expr::Or(cs) => cs.iter().filter_map(Expr::max_var).max(),
            Expr::Implies(a, b) | Expr::Iff(a, b) => a.max_var().max(b.max_var()),
            Expr::Const(_) => None,
        }
    }
}

/// Index of a node in a [`Formula`] arena.
pub type NodeId = usize;

/// A node of the canonical arena. Children always have smaller ids than
/// their parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// A variable or a negated variable.
    Lit(Lit),
    Not(NodeId),
    /// At least two children, none of which is itself an `And`.
    And(Vec<NodeId>),
    /// At least two children, none of which is itself an `Or`.
    Or(Vec<NodeId>),
    Implies(NodeId, NodeId),
    Iff(NodeId, NodeId),
    Const(bool),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable v{var} is out of range for {num_vars} declared variables")]
    VarOutOfRange { var: u32, num_vars: usize },
    #[error("variable name {0:?} is not a valid identifier")]
    BadName(String),
}

/// A propositional formula in canonical arena form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    nodes: Vec<Node>,
    parents: Vec<Option<NodeId>>,
    names: Vec<String>,
}

impl Formula {
    /// Builds the canonical arena for `expr`. `names` declares the variable
    /// universe; every variable in `expr` must be below `names.len()`.
    pub fn new(expr: &Expr, names: Vec<String>) -> Result<Formula, FormulaError> {
        if let Some(max) = expr.max_var() {
            if max as usize >= names.len() {
                return Err(FormulaError::VarOutOfRange { var: max, num_vars: names.len() });
            }
        }
        if let Some(bad) = names.iter().find(|n| !parse::is_identifier(n)) {
            return Err(FormulaError::BadName(bad.clone()));
        }
        let mut builder = Builder { nodes: Vec::new() };
        builder.push(expr);
        let parents = compute_parents(&builder.nodes);
        Ok(Formula { nodes: builder.nodes, parents, names })
    }

    /// Like [`Formula::new`] with variables named `v0 .. v{num_vars-1}`.
    pub fn with_vars(expr: &Expr, num_vars: usize) -> Result<Formula, FormulaError> {
        Formula::new(expr, (0..num_vars).map(|i| format!("v{i}")).collect())
    }

    /// Like [`Formula::with_vars`], declaring exactly as many variables as
    /// the largest id in `expr` requires.
    pub fn from_expr(expr: &Expr) -> Formula {
        let n = expr.max_var().map_or(0, |m| m as usize + 1);
        Formula::with_vars(expr, n).expect("variable universe derived from the expression")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parents[id]
    }

    /// Number of declared variables (the length of a total assignment).
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, var: Var) -> &str {
        &self.names[var.index()]
    }

    /// Node count of the canonical arena. A negated variable counts as one
    /// literal node.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// The variables occurring in the formula, ascending.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut seen = vec![false; self.num_vars()];
        for node in &self.nodes {
            if let Node::Lit(l) = node {
                seen[l.var().index()] = true;
            }
        }
        seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| Var(i as u32)).collect()
    }

    /// Child ids of `id`, in order.
    pub fn children(&self, id: NodeId) -> Children<'_> {
        match &self.nodes[id] {
            Node::Lit(_) | Node::Const(_) => Children::Slice([].iter()),
            Node::Not(c) => Children::Slice(std::slice::from_ref(c).iter()),
            Node::And(cs) | Node::Or(cs) => Children::Slice(cs.iter()),
            Node::Implies(a, b) | Node::Iff(a, b) => Children::Pair([*a, *b], 0),
        }
    }

    /// Truth value under `assignment`, by plain boolean evaluation. Panics if
    /// the assignment is shorter than the variable universe.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        assert!(assignment.len() >= self.num_vars(), "assignment does not cover the formula");
        let mut value: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Lit(l) => l.eval(assignment),
                Node::Const(b) => *b,
                Node::Not(c) => !value[*c],
                Node::And(cs) => cs.iter().all(|&c| value[c]),
                Node::Or(cs) => cs.iter().any(|&c| value[c]),
                Node::Implies(a, b) => !value[*a] || value[*b],
                Node::Iff(a, b) => value[*a] == value[*b],
            };
            value.push(v);
        }
        value[self.root()]
    }

    /// Tree form of the subformula rooted at `id`.
    pub fn to_expr_at(&self, id: NodeId) -> Expr {
        match &self.nodes[id] {
            Node::Lit(l) => Expr::lit(*l),
            Node::Const(b) => Expr::Const(*b),
            Node::Not(c) => Expr::negate(self.to_expr_at(*c)),
            Node::And(cs) => Expr::And(cs.iter().map(|&c| self.to_expr_at(c)).collect()),
            Node::Or(cs) => Expr::Or(cs.iter().map(|&c| self.to_expr_at(c)).collect()),
            Node::Implies(a, b) => Expr::implies(self.to_expr_at(*a), self.to_expr_at(*b)),
            Node::Iff(a, b) => Expr::iff(self.to_expr_at(*a), self.to_expr_at(*b)),
        }
    }

    pub fn to_expr(&self) -> Expr {
        self.to_expr_at(self.root())
    }

    /// Infix text of the subformula at `id`, in the input grammar.
    pub fn render_at(&self, id: NodeId) -> String {
        let mut out = String::new();
        parse::render_node(self, id, &mut out);
        out
    }

    /// Infix text of the whole formula; parses back to an equal formula.
    pub fn render(&self) -> String {
        self.render_at(self.root())
    }

    /// Ids of the literal leaves of each variable.
    pub fn occurrences(&self) -> Vec<Vec<NodeId>> {
        let mut occ = vec![Vec::new(); self.num_vars()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Lit(l) = node {
                occ[l.var().index()].push(id);
            }
        }
        occ
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Iterator over the children of a node.
pub enum Children<'a> {
    Slice(std::slice::Iter<'a, NodeId>),
    Pair([NodeId; 2], usize),
}

impl Iterator for Children<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        match self {
            Children::Slice(it) => it.next().copied(),
            Children::Pair(pair, i) => {
                let out = pair.get(*i).copied();
                *i += 1;
                out
            }
        }
    }
}

struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn add(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn push(&mut self, expr: &Expr) -> NodeId {
        match expr {
            Expr::Var(v) => self.add(Node::Lit(v.lit(true))),
            Expr::Const(b) => self.add(Node::Const(*b)),
            Expr::Not(c) => match c.as_ref() {
                Expr::Var(v) => self.add(Node::Lit(v.lit(false))),
                other => {
                    let c = self.push(other);
                    self.add(Node::Not(c))
                }
            },
            Expr::And(cs) => self.push_nary(cs, true),
            Expr::Or(cs) => self.push_nary(cs, false),
            Expr::Implies(a, b) => {
                let a = self.push(a);
                let b = self.push(b);
                self.add(Node::Implies(a, b))
            }
            Expr::Iff(a, b) => {
                let a = self.push(a);
                let b = self.push(b);
                self.add(Node::Iff(a, b))
            }
        }
    }

    fn push_nary(&mut self, children: &[Expr], conj: bool) -> NodeId {
        let mut flat = Vec::new();
        collect_flat(children, conj, &mut flat);
        match flat.len() {
            // Empty conjunction is true, empty disjunction is false.
            0 => self.add(Node::Const(conj)),
            1 => self.push(flat[0]),
            _ => {
                let ids = flat.into_iter().map(|c| self.push(c)).collect();
                self.add(if conj { Node::And(ids) } else { Node::Or(ids) })
            }
        }
    }
}

fn collect_flat<'e>(children: &'e [Expr], conj: bool, out: &mut Vec<&'e Expr>) {
    for c in children {
        match c {
            Expr::And(cs) if conj => collect_flat(cs, conj, out),
            Expr::Or(cs) if !conj => collect_flat(cs, conj, out),
            other => out.push(other),
        }
    }
}

fn compute_parents(nodes: &[Node]) -> Vec<Option<NodeId>> {
    let mut parents = vec![None; nodes.len()];
    for (id, node) in nodes.iter().enumerate() {
        match node {
            Node::Lit(_) | Node::Const(_) => {}
            Node::Not(c) => parents[*c] = Some(id),
            Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|&c| parents[c] = Some(id)),
            Node::Implies(a, b) | Node::Iff(a, b) => {
                parents[*a] = Some(id);
                parents[*b] = Some(id);
            }
        }
    }
    parents
}
