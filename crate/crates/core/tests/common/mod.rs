#![allow(dead_code)]

use ncgsat::gen::{random_formula, FormulaParams, OpWeights};
use ncgsat::{Assignment, ClauseSet, Expr, Formula, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic corpus of random formulas with at most `max_vars` declared
/// variables and at most `max_size` nodes.
pub fn corpus(count: usize, max_vars: usize, max_size: usize, seed: u64) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let params = FormulaParams {
            depth: rng.gen_range(1..=4),
            arity: 3,
            vars: rng.gen_range(1..=max_vars),
            weights: OpWeights::default(),
        };
        let f = random_formula(&params, rng.gen()).unwrap();
        if f.size() <= max_size {
            out.push(f);
        }
    }
    out
}

pub fn assignments(n: usize) -> impl Iterator<Item = Assignment> {
    (0..1u64 << n).map(move |i| Assignment::from_index(n, i))
}

/// Which node kinds occur anywhere in `formulas`:
/// `[literal, not, and, or, implies, iff]`.
pub fn operators_seen(formulas: &[Formula]) -> [bool; 6] {
    let mut seen = [false; 6];
    for f in formulas {
        for n in f.nodes() {
            let k = match n {
                Node::Lit(l) if !l.is_positive() => 1,
                Node::Lit(_) => 0,
                Node::Not(_) => 1,
                Node::And(_) => 2,
                Node::Or(_) => 3,
                Node::Implies(..) => 4,
                Node::Iff(..) => 5,
                Node::Const(_) => continue,
            };
            seen[k] = true;
        }
    }
    seen
}

/// Disjunction of `k` binary conjunctions over fresh variables.
pub fn or_of_ands(k: usize) -> Formula {
    let expr = Expr::Or((0..k as u32).map(|i| Expr::And(vec![Expr::var(2 * i), Expr::var(2 * i + 1)])).collect());
    Formula::from_expr(&expr)
}

/// Conjunction of `parts` random subformulas over 40 shared variables.
pub fn scaled_formula(parts: usize, seed: u64) -> Formula {
    let params = FormulaParams { depth: 5, arity: 3, vars: 40, weights: OpWeights::default() };
    let conjuncts = (0..parts as u64)
        .map(|i| random_formula(&params, seed.wrapping_mul(1_000_003).wrapping_add(i)).unwrap().to_expr())
        .collect();
    Formula::with_vars(&Expr::And(conjuncts), params.vars).unwrap()
}

/// Small DPLL with unit propagation, used only to certify satisfiability of
/// instances too large to enumerate.
pub fn dpll(cs: &ClauseSet) -> Option<Assignment> {
    let clauses: Vec<Vec<(usize, bool)>> =
        cs.clauses().iter().map(|c| c.lits().iter().map(|l| (l.var().index(), l.is_positive())).collect()).collect();
    let mut values = vec![None; cs.num_vars()];
    if solve(&clauses, &mut values) {
        Some(Assignment::new(values.into_iter().map(|v| v.unwrap_or(false)).collect()))
    } else {
        None
    }
}

fn solve(clauses: &[Vec<(usize, bool)>], values: &mut Vec<Option<bool>>) -> bool {
    let mut assigned = Vec::new();
    loop {
        let mut unit = None;
        for c in clauses {
            let mut open = None;
            let mut open_count = 0;
            let mut satisfied = false;
            for &(v, pos) in c {
                match values[v] {
                    Some(b) if b == pos => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        open_count += 1;
                        open = Some((v, pos));
                    }
                }
            }
            if satisfied {
                continue;
            }
            match open_count {
                0 => {
                    for v in assigned {
                        values[v] = None;
                    }
                    return false;
                }
                1 => {
                    unit = open;
                    break;
                }
                _ => {}
            }
        }
        match unit {
            Some((v, pos)) => {
                values[v] = Some(pos);
                assigned.push(v);
            }
            None => break,
        }
    }
    let Some(branch) = values.iter().position(Option::is_none) else {
        return true;
    };
    for choice in [true, false] {
        values[branch] = Some(choice);
        if solve(clauses, values) {
            return true;
        }
    }
    values[branch] = None;
    for v in assigned {
        values[v] = None;
    }
    false
}
