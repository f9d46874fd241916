//! Instance families shared by the criterion benchmarks.

use ncgsat::gen::{random_formula, FormulaParams, OpWeights};
use ncgsat::{Assignment, Expr, Formula};

/// A conjunction of `parts` independent random subformulas, giving a
/// formula whose size grows linearly with `parts`.
pub fn scaled_formula(parts: usize, seed: u64) -> Formula {
    let params = FormulaParams { depth: 5, arity: 3, vars: 40, weights: OpWeights::default() };
    let conjuncts = (0..parts as u64)
        .map(|i| random_formula(&params, seed.wrapping_mul(1_000_003).wrapping_add(i)).unwrap().to_expr())
        .collect();
    Formula::with_vars(&Expr::And(conjuncts), params.vars).unwrap()
}

/// Disjunction of `k` binary conjunctions: 2^k standard clauses from 3k nodes.
pub fn or_of_ands(k: usize) -> Formula {
    let expr = Expr::Or((0..k as u32).map(|i| Expr::And(vec![Expr::var(2 * i), Expr::var(2 * i + 1)])).collect());
    Formula::from_expr(&expr)
}

/// A fixed mixed assignment: every third variable false.
pub fn striped_assignment(n: usize) -> Assignment {
    Assignment::new((0..n).map(|i| i % 3 != 0).collect())
}
