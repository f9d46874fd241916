//! Clause-counting scores computed directly on the formula tree.
//!
//! Every node carries a [`ScorePair`]: the number of clauses of the standard
//! conversion of the node's subformula that the current assignment falsifies,
//! and the same count for the negated subformula. The pairs combine bottom-up:
//!
//! ```text
//! literal l        (0, 1) if l is true, (1, 0) otherwise
//! !a               (a-, a+)
//! a1 & .. & an     (sum ai+, prod ai-)
//! a1 | .. | an     (prod ai+, sum ai-)
//! a -> b           (a- * b+, a+ + b-)
//! a <-> b          (a- * b+ + b- * a+, a+ * b+ + a- * b-)
//! 1                (0, 1)
//! 0                (1, 0)
//! ```
//!
//! The root's first component is the score of the assignment. One pass visits
//! each node once; a flip only recomputes the ancestors of the flipped
//! variable's leaves.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::formula::{Assignment, Formula, Node, NodeId, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreError {
    #[error("assignment covers {found} variables but the formula declares {expected}")]
    AssignmentLength { expected: usize, found: usize },
    #[error("variable {var} is out of range for {num_vars} variables")]
    VarOutOfRange { var: Var, num_vars: usize },
    #[error("random walk requested while the assignment already satisfies the formula")]
    AlreadySatisfied,
}

/// False-clause counts of a subformula (`pos`) and of its negation (`neg`).
/// Under a total assignment exactly one of the two is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ScorePair {
    pub pos: BigUint,
    pub neg: BigUint,
}

impl ScorePair {
    pub fn new(pos: impl Into<BigUint>, neg: impl Into<BigUint>) -> Self {
        ScorePair { pos: pos.into(), neg: neg.into() }
    }

    fn truth(value: bool) -> Self {
        if value {
            ScorePair::new(0u32, 1u32)
        } else {
            ScorePair::new(1u32, 0u32)
        }
    }

    fn swapped(&self) -> Self {
        ScorePair { pos: self.neg.clone(), neg: self.pos.clone() }
    }

    /// Score of the subformula under polarity `positive`.
    pub fn get(&self, positive: bool) -> &BigUint {
        if positive {
            &self.pos
        } else {
            &self.neg
        }
    }
}

fn product<'a>(factors: impl Iterator<Item = &'a BigUint> + Clone) -> BigUint {
    if factors.clone().any(Zero::is_zero) {
        return BigUint::zero();
    }
    factors.fold(BigUint::from(1u32), |acc, f| acc * f)
}

/// Pair of a node from the pairs of its children.
fn combine<'a>(node: &Node, assignment: &Assignment, pair: impl Fn(NodeId) -> &'a ScorePair) -> ScorePair {
    match node {
        Node::Lit(l) => ScorePair::truth(l.eval(assignment)),
        Node::Const(b) => ScorePair::truth(*b),
        Node::Not(c) => pair(*c).swapped(),
        Node::And(cs) => {
            ScorePair { pos: cs.iter().map(|&c| &pair(c).pos).sum(), neg: product(cs.iter().map(|&c| &pair(c).neg)) }
        }
        Node::Or(cs) => {
            ScorePair { pos: product(cs.iter().map(|&c| &pair(c).pos)), neg: cs.iter().map(|&c| &pair(c).neg).sum() }
        }
        Node::Implies(a, b) => {
            let (a, b) = (pair(*a), pair(*b));
            ScorePair { pos: &a.neg * &b.pos, neg: &a.pos + &b.neg }
        }
        Node::Iff(a, b) => {
            let (a, b) = (pair(*a), pair(*b));
            ScorePair { pos: &a.neg * &b.pos + &b.neg * &a.pos, neg: &a.pos * &b.pos + &a.neg * &b.neg }
        }
    }
}

/// Per-node pairs of one bottom-up pass.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pairs: Vec<ScorePair>,
    /// Nodes visited by the pass.
    pub visits: usize,
}

impl Evaluation {
    pub fn root(&self) -> &ScorePair {
        self.pairs.last().expect("formulas are nonempty")
    }
}

fn check_assignment(f: &Formula, t: &Assignment) -> Result<(), ScoreError> {
    if t.len() != f.num_vars() {
        return Err(ScoreError::AssignmentLength { expected: f.num_vars(), found: t.len() });
    }
    Ok(())
}

/// Pairs for every node of `f` under `t`, in a single pass.
pub fn eval_all(f: &Formula, t: &Assignment) -> Result<Evaluation, ScoreError> {
    check_assignment(f, t)?;
    let mut pairs: Vec<ScorePair> = Vec::with_capacity(f.size());
    let mut visits = 0;
    for node in f.nodes() {
        let p = combine(node, t, |c| &pairs[c]);
        pairs.push(p);
        visits += 1;
    }
    Ok(Evaluation { pairs, visits })
}

/// The root pair of `f` under `t`.
pub fn eval_scores(f: &Formula, t: &Assignment) -> Result<ScorePair, ScoreError> {
    eval_all(f, t).map(|mut e| e.pairs.swap_remove(f.root()))
}

/// Work counters for the acceptance suite and benchmarks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreStats {
    /// Nodes visited by full evaluations.
    pub nodes_visited: u64,
    pub flips: u64,
    /// Nodes recomputed by incremental updates, summed over all flips.
    pub nodes_recomputed: u64,
    /// Delta-table entries recomputed, summed over all flips.
    pub deltas_refreshed: u64,
}

/// What one [`ScoreState::flip_and_update`] touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipReport {
    /// Nodes whose pair was recomputed.
    pub recomputed: usize,
    /// Recomputed nodes whose pair actually changed.
    pub changed: usize,
    /// Variables whose delta was refreshed.
    pub dirty: Vec<Var>,
}

/// Incrementally maintained scores and delta table for one assignment.
#[derive(Debug, Clone)]
pub struct ScoreState<'f> {
    formula: &'f Formula,
    assignment: Assignment,
    pairs: Vec<ScorePair>,
    deltas: Vec<BigInt>,
    occurrences: Vec<Vec<NodeId>>,
    free: Vec<Var>,
    has_var: Vec<bool>,
    stats: ScoreStats,
}

impl<'f> ScoreState<'f> {
    pub fn new(formula: &'f Formula, assignment: Assignment) -> Result<Self, ScoreError> {
        check_assignment(formula, &assignment)?;
        let mut has_var = Vec::with_capacity(formula.size());
        for (id, node) in formula.nodes().iter().enumerate() {
            let h = matches!(node, Node::Lit(_)) || formula.children(id).any(|c| has_var[c]);
            has_var.push(h);
        }
        let mut st = ScoreState {
            formula,
            assignment,
            pairs: Vec::new(),
            deltas: vec![BigInt::zero(); formula.num_vars()],
            occurrences: formula.occurrences(),
            free: formula.free_vars(),
            has_var,
            stats: ScoreStats::default(),
        };
        st.evaluate_from_scratch();
        Ok(st)
    }

    /// Replaces the assignment and rebuilds every cache.
    pub fn reset(&mut self, assignment: Assignment) -> Result<(), ScoreError> {
        check_assignment(self.formula, &assignment)?;
        self.assignment = assignment;
        self.evaluate_from_scratch();
        Ok(())
    }

    fn evaluate_from_scratch(&mut self) {
        let eval = eval_all(self.formula, &self.assignment).expect("length checked");
        self.stats.nodes_visited += eval.visits as u64;
        self.pairs = eval.pairs;
        self.deltas.iter_mut().for_each(|d| d.set_zero());
        let free = self.free.clone();
        self.refresh_deltas(&free);
    }

    pub fn formula(&self) -> &'f Formula {
        self.formula
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn pairs(&self) -> &[ScorePair] {
        &self.pairs
    }

    pub fn root_pair(&self) -> &ScorePair {
        &self.pairs[self.formula.root()]
    }

    /// Current score of the assignment.
    pub fn score(&self) -> &BigUint {
        &self.root_pair().pos
    }

    pub fn deltas(&self) -> &[BigInt] {
        &self.deltas
    }

    pub fn stats(&self) -> ScoreStats {
        self.stats
    }

    fn check_var(&self, v: Var) -> Result<(), ScoreError> {
        if v.index() >= self.formula.num_vars() {
            return Err(ScoreError::VarOutOfRange { var: v, num_vars: self.formula.num_vars() });
        }
        Ok(())
    }

    /// The leaves of `v` and all their ancestors, ascending.
    fn path_nodes(&self, v: Var) -> Vec<NodeId> {
        let mut nodes = Vec::new();
        for &leaf in &self.occurrences[v.index()] {
            let mut cur = Some(leaf);
            while let Some(id) = cur {
                nodes.push(id);
                cur = self.formula.parent(id);
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Score change caused by flipping `v`, computed along `v`'s root paths
    /// without touching the state.
    pub fn delta(&self, v: Var) -> Result<BigInt, ScoreError> {
        self.check_var(v)?;
        let nodes = self.path_nodes(v);
        let Some(&root) = nodes.last() else {
            return Ok(BigInt::zero());
        };
        let f = self.formula;
        let mut fresh: Vec<ScorePair> = Vec::with_capacity(nodes.len());
        // Indices (into `nodes`) of each node's recomputed children.
        let mut changed_kids: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, &id) in nodes.iter().enumerate() {
            let old = &self.pairs[id];
            let get = |c: NodeId| match nodes[..i].binary_search(&c) {
                Ok(j) => &fresh[j],
                Err(_) => &self.pairs[c],
            };
            let kid_delta = |select: fn(&ScorePair) -> &BigUint, total: &BigUint| {
                let mut sum = total.clone();
                let mut add = BigUint::zero();
                for &j in &changed_kids[i] {
                    sum -= select(&self.pairs[nodes[j]]);
                    add += select(&fresh[j]);
                }
                sum + add
            };
            let at_root = id == root;
            let p = match f.node(id) {
                Node::Lit(_) => old.swapped(),
                // Sums move by the difference of the recomputed children; the
                // root only needs its positive component.
                Node::And(cs) => ScorePair {
                    pos: kid_delta(|p| &p.pos, &old.pos),
                    neg: if at_root { BigUint::zero() } else { product(cs.iter().map(|&c| &get(c).neg)) },
                },
                Node::Or(cs) => ScorePair {
                    pos: product(cs.iter().map(|&c| &get(c).pos)),
                    neg: if at_root { BigUint::zero() } else { kid_delta(|p| &p.neg, &old.neg) },
                },
                node => combine(node, &self.assignment, get),
            };
            if let Some(parent) = f.parent(id) {
                let j = nodes.binary_search(&parent).expect("ancestors are on the path");
                changed_kids[j].push(i);
            }
            fresh.push(p);
        }
        let new_score = BigInt::from(fresh.pop().expect("nonempty").pos);
        Ok(new_score - BigInt::from(self.score().clone()))
    }

    /// Recomputes the delta-table entries of `dirty`.
    pub fn refresh_deltas(&mut self, dirty: &[Var]) {
        for &v in dirty {
            self.deltas[v.index()] = self.delta(v).expect("dirty variables are in range");
        }
        self.stats.deltas_refreshed += dirty.len() as u64;
    }

    /// Flips `v`, recomputes the pairs on its root paths from the children's
    /// cached pairs, and refreshes the deltas that may have changed.
    pub fn flip_and_update(&mut self, v: Var) -> Result<FlipReport, ScoreError> {
        self.check_var(v)?;
        self.assignment.flip(v);
        let f = self.formula;
        let nodes = self.path_nodes(v);
        let mut changed = Vec::new();
        for &id in &nodes {
            let p = combine(f.node(id), &self.assignment, |c| &self.pairs[c]);
            if p != self.pairs[id] {
                self.pairs[id] = p;
                changed.push(id);
            }
        }
        let dirty = self.dirty_vars(&changed);
        self.refresh_deltas(&dirty);
        self.stats.flips += 1;
        self.stats.nodes_recomputed += nodes.len() as u64;
        Ok(FlipReport { recomputed: nodes.len(), changed: changed.len(), dirty })
    }

    /// Variables whose delta can depend on a changed node: everything below
    /// the parent of each changed node.
    fn dirty_vars(&self, changed: &[NodeId]) -> Vec<Var> {
        let f = self.formula;
        let mut tops: Vec<NodeId> = changed.iter().map(|&id| f.parent(id).unwrap_or(id)).collect();
        if tops.contains(&f.root()) {
            return self.free.clone();
        }
        tops.sort_unstable();
        tops.dedup();
        let mut seen = HashSet::new();
        let mut stack = tops;
        let mut visited = HashSet::new();
        while let Some(id) = stack.pop() {
            if !visited.insert(id) {
                continue;
            }
            match f.node(id) {
                Node::Lit(l) => {
                    seen.insert(l.var());
                }
                _ => stack.extend(f.children(id)),
            }
        }
        let mut vars: Vec<Var> = seen.into_iter().collect();
        vars.sort_unstable();
        vars
    }

    /// Random-walk choice: descend from the root through children whose
    /// relevant score component is nonzero, tracking polarity, and return the
    /// variable at the leaf reached. `None` if every such branch ends in a
    /// constant.
    pub fn walk_pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<Var>, ScoreError> {
        if self.score().is_zero() {
            return Err(ScoreError::AlreadySatisfied);
        }
        let f = self.formula;
        let (mut id, mut positive) = (f.root(), true);
        let nonzero = |c: NodeId, pol: bool| !self.pairs[c].get(pol).is_zero();
        loop {
            let mut options: Vec<(NodeId, bool)> = match f.node(id) {
                Node::Lit(l) => return Ok(Some(l.var())),
                Node::Const(_) => return Ok(None),
                Node::Not(c) => vec![(*c, !positive)],
                Node::And(cs) | Node::Or(cs) => cs.iter().map(|&c| (c, positive)).collect(),
                Node::Implies(a, b) => vec![(*a, !positive), (*b, positive)],
                Node::Iff(a, b) => {
                    let (a, b) = (*a, *b);
                    let p = |c: NodeId| &self.pairs[c];
                    let (first, second) = if positive {
                        (
                            (&p(a).neg * &p(b).pos, [(a, false), (b, true)]),
                            (&p(b).neg * &p(a).pos, [(b, false), (a, true)]),
                        )
                    } else {
                        (
                            (&p(a).pos * &p(b).pos, [(a, true), (b, true)]),
                            (&p(a).neg * &p(b).neg, [(a, false), (b, false)]),
                        )
                    };
                    [first, second]
                        .into_iter()
                        .filter(|(term, _)| !term.is_zero())
                        .flat_map(|(_, branch)| branch)
                        .collect()
                }
            };
            options.retain(|&(c, pol)| nonzero(c, pol) && self.has_var[c]);
            if options.is_empty() {
                return Ok(None);
            }
            let k = rng.gen_range(0..options.len());
            (id, positive) = options[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Expr};

    fn var(i: u32) -> Var {
        Var(i)
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn worked_example_score() {
        let f = parse_formula("(!a & !b & c) | !d | (!e & !f)").unwrap();
        let root = eval_scores(&f, &Assignment::all(6, true)).unwrap();
        assert_eq!(root.pos, BigUint::from(4u32));
        assert_eq!(root.neg, BigUint::zero());
    }

    #[test]
    fn satisfied_literal() {
        let f = Formula::from_expr(&Expr::var(0));
        assert_eq!(eval_scores(&f, &Assignment::all(1, true)).unwrap(), ScorePair::new(0u32, 1u32));
    }

    #[test]
    fn iff_mixed_assignment() {
        let f = parse_formula("a <-> b").unwrap();
        let root = eval_scores(&f, &Assignment::new(vec![true, false])).unwrap();
        assert_eq!(root.pos, BigUint::from(1u32));
    }

    #[test]
    fn contradiction_scores_one_either_way() {
        let f = parse_formula("a & !a").unwrap();
        for value in [true, false] {
            let root = eval_scores(&f, &Assignment::all(1, value)).unwrap();
            assert_eq!(root, ScorePair::new(1u32, 0u32));
        }
    }

    #[test]
    fn assignment_length_is_checked() {
        let f = parse_formula("a & b").unwrap();
        assert_eq!(
            eval_scores(&f, &Assignment::all(3, true)),
            Err(ScoreError::AssignmentLength { expected: 2, found: 3 })
        );
    }

    #[test]
    fn flip_single_literal() {
        let f = Formula::from_expr(&Expr::var(0));
        let mut st = ScoreState::new(&f, Assignment::all(1, true)).unwrap();
        assert_eq!(st.deltas()[0], big(1));
        st.flip_and_update(var(0)).unwrap();
        assert_eq!(st.root_pair(), &ScorePair::new(1u32, 0u32));
        assert_eq!(st.deltas()[0], big(-1));
    }

    #[test]
    fn flip_d_in_worked_example() {
        let f = parse_formula("(!a & !b & c) | !d | (!e & !f)").unwrap();
        let mut st = ScoreState::new(&f, Assignment::all(6, true)).unwrap();
        assert_eq!(st.delta(var(3)).unwrap(), big(-4));
        st.flip_and_update(var(3)).unwrap();
        assert!(st.score().is_zero());
        assert!(f.evaluate(st.assignment()));
    }

    #[test]
    fn flip_in_wide_conjunction_touches_two_nodes() {
        let e = Expr::and((0..100).map(|i| Expr::lit(var(i).lit(i % 2 == 0))).collect());
        let f = Formula::from_expr(&e);
        let mut st = ScoreState::new(&f, Assignment::all(100, true)).unwrap();
        let report = st.flip_and_update(var(17)).unwrap();
        assert_eq!(report.recomputed, 2);
    }

    #[test]
    fn delta_zero_under_satisfied_sibling() {
        let f = parse_formula("a | b").unwrap();
        let st = ScoreState::new(&f, Assignment::all(2, true)).unwrap();
        assert_eq!(st.delta(var(1)).unwrap(), big(0));
        assert_eq!(st.delta(var(2)), Err(ScoreError::VarOutOfRange { var: var(2), num_vars: 2 }));
    }

    #[test]
    fn unused_variable_has_zero_delta() {
        let f = Formula::with_vars(&Expr::var(0), 3).unwrap();
        let st = ScoreState::new(&f, Assignment::all(3, false)).unwrap();
        assert_eq!(st.deltas(), &[big(-1), big(0), big(0)]);
    }

    #[test]
    fn untouched_sibling_delta_is_refreshed() {
        // With c true, flipping b changes (a & b) but leaves the pair of
        // ((a & b) | c) as it was; c's delta still moves from 2 to 1.
        let f = parse_formula("((a & b) | c) & d").unwrap();
        let mut st = ScoreState::new(&f, Assignment::new(vec![false, false, true, true])).unwrap();
        assert_eq!(st.deltas()[2], big(2));
        let report = st.flip_and_update(var(1)).unwrap();
        assert_eq!(report.changed, 2);
        assert_eq!(st.deltas()[2], big(1));
        for v in 0..4 {
            let brute = {
                let t = st.assignment().flipped(var(v));
                BigInt::from(eval_scores(&f, &t).unwrap().pos) - BigInt::from(st.score().clone())
            };
            assert_eq!(st.deltas()[v as usize], brute, "variable {v}");
        }
    }

    #[test]
    fn walk_follows_the_only_false_conjunct() {
        let f = parse_formula("a & b").unwrap();
        let st = ScoreState::new(&f, Assignment::new(vec![true, false])).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        assert_eq!(st.walk_pick(&mut rng).unwrap(), Some(var(1)));
    }

    #[test]
    fn walk_refuses_at_score_zero() {
        let f = parse_formula("a").unwrap();
        let st = ScoreState::new(&f, Assignment::all(1, true)).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        assert_eq!(st.walk_pick(&mut rng), Err(ScoreError::AlreadySatisfied));
    }

    #[test]
    fn walk_dead_ends_at_constants() {
        let f = parse_formula("0 & a").unwrap();
        let st = ScoreState::new(&f, Assignment::all(1, true)).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        assert_eq!(st.walk_pick(&mut rng).unwrap(), None);
    }
}
