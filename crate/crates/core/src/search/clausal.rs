//! Reference GSAT engine over an explicit clause set.

use num_bigint::BigUint;
use rand::Rng;

use super::Engine;
use crate::cnf::ClauseSet;
use crate::formula::{Assignment, Var};

const POS: u8 = 1;
const NEG: u8 = 2;

/// Clause-set engine: per-clause true-literal counts and a delta table,
/// updated by visiting only the clauses that contain the flipped variable.
#[derive(Debug, Clone)]
pub struct ClauseEngine<'c> {
    cs: &'c ClauseSet,
    /// For each variable, the clauses containing it and which signs occur.
    occ: Vec<Vec<(usize, u8)>>,
    assignment: Assignment,
    true_count: Vec<u32>,
    num_false: usize,
    deltas: Vec<i64>,
    clause_visits: u64,
    mark: Vec<u64>,
    epoch: u64,
}

impl<'c> ClauseEngine<'c> {
    pub fn new(cs: &'c ClauseSet) -> Self {
        let n = cs.num_vars();
        let mut occ: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
        for (ci, clause) in cs.clauses().iter().enumerate() {
            for l in clause.lits() {
                let sign = if l.is_positive() { POS } else { NEG };
                let list = &mut occ[l.var().index()];
                match list.last_mut() {
                    Some((c, mask)) if *c == ci => *mask |= sign,
                    _ => list.push((ci, sign)),
                }
            }
        }
        let mut engine = ClauseEngine {
            cs,
            occ,
            assignment: Assignment::all(n, false),
            true_count: vec![0; cs.len()],
            num_false: 0,
            deltas: vec![0; n],
            clause_visits: 0,
            mark: vec![0; n],
            epoch: 0,
        };
        engine.rebuild();
        engine
    }

    fn rebuild(&mut self) {
        for (ci, clause) in self.cs.clauses().iter().enumerate() {
            self.true_count[ci] = clause.lits().iter().filter(|l| l.eval(&self.assignment)).count() as u32;
        }
        self.num_false = self.true_count.iter().filter(|&&c| c == 0).count();
        for v in 0..self.cs.num_vars() {
            self.deltas[v] = self.compute_delta(Var(v as u32));
        }
    }

    pub fn num_false(&self) -> usize {
        self.num_false
    }

    /// Clauses visited by flip updates so far.
    pub fn clause_visits(&self) -> u64 {
        self.clause_visits
    }

    fn literals_true(&self, v: Var, mask: u8) -> (u32, u32) {
        let value = self.assignment.get(v);
        let t = u32::from(mask & POS != 0 && value) + u32::from(mask & NEG != 0 && !value);
        let total = u32::from(mask & POS != 0) + u32::from(mask & NEG != 0);
        (t, total - t)
    }

    fn compute_delta(&self, v: Var) -> i64 {
        self.occ[v.index()]
            .iter()
            .map(|&(ci, mask)| {
                let (t, f) = self.literals_true(v, mask);
                let now = self.true_count[ci];
                let after = now - t + f;
                i64::from(after == 0) - i64::from(now == 0)
            })
            .sum()
    }

    /// Flips `v` and returns the number of clauses visited.
    pub fn flip_var(&mut self, v: Var) -> usize {
        // Counts before the flip: literals of v that are true now turn false.
        let occ = std::mem::take(&mut self.occ[v.index()]);
        for &(ci, mask) in &occ {
            let (t, f) = self.literals_true(v, mask);
            let before = self.true_count[ci];
            let after = before - t + f;
            self.true_count[ci] = after;
            self.num_false = self.num_false + usize::from(after == 0) - usize::from(before == 0);
        }
        self.assignment.flip(v);
        self.occ[v.index()] = occ;
        self.clause_visits += self.occ[v.index()].len() as u64;

        // Every variable sharing a clause with v may have a new delta.
        self.epoch += 1;
        let mut dirty = Vec::new();
        for &(ci, _) in &self.occ[v.index()] {
            for l in self.cs.clauses()[ci].lits() {
                let u = l.var().index();
                if self.mark[u] != self.epoch {
                    self.mark[u] = self.epoch;
                    dirty.push(u);
                }
            }
        }
        for u in dirty {
            self.deltas[u] = self.compute_delta(Var(u as u32));
        }
        self.occ[v.index()].len()
    }
}

impl Engine for ClauseEngine<'_> {
    type Delta = i64;

    fn num_vars(&self) -> usize {
        self.cs.num_vars()
    }

    fn reset(&mut self, assignment: Assignment) {
        assert_eq!(assignment.len(), self.cs.num_vars());
        self.assignment = assignment;
        self.rebuild();
    }

    fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    fn score(&self) -> BigUint {
        BigUint::from(self.num_false)
    }

    fn is_satisfied(&self) -> bool {
        self.num_false == 0
    }

    fn deltas(&self) -> &[i64] {
        &self.deltas
    }

    fn flip(&mut self, v: Var) {
        self.flip_var(v);
    }

    fn walk_pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Var> {
        let falsified: Vec<usize> =
            (0..self.cs.len()).filter(|&ci| self.true_count[ci] == 0 && !self.cs.clauses()[ci].is_empty()).collect();
        pick_from_falsified(self.cs, &falsified, rng)
    }

    fn update_work(&self) -> u64 {
        self.clause_visits
    }
}

fn pick_from_falsified<R: Rng + ?Sized>(cs: &ClauseSet, falsified: &[usize], rng: &mut R) -> Option<Var> {
    if falsified.is_empty() {
        return None;
    }
    let clause = &cs.clauses()[falsified[rng.gen_range(0..falsified.len())]];
    Some(clause.lits()[rng.gen_range(0..clause.len())].var())
}

/// Random-walk choice over a clause set: a uniformly random falsified
/// clause, then a uniformly random literal of it. Empty clauses are skipped;
/// `Ok(None)` if only empty clauses are falsified.
pub fn walk_pick_clausal<R: Rng + ?Sized>(
    cs: &ClauseSet,
    assignment: &Assignment,
    rng: &mut R,
) -> Result<Option<Var>, WalkError> {
    let falsified: Vec<usize> =
        cs.clauses().iter().enumerate().filter(|(_, c)| c.is_falsified(assignment)).map(|(i, _)| i).collect();
    if falsified.is_empty() {
        return Err(WalkError::AlreadySatisfied);
    }
    let nonempty: Vec<usize> = falsified.into_iter().filter(|&i| !cs.clauses()[i].is_empty()).collect();
    Ok(pick_from_falsified(cs, &nonempty, rng))
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("random walk requested while the assignment already satisfies the clauses")]
    AlreadySatisfied,
}
