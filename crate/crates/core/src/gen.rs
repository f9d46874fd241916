//! Seeded random instances.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Expr, Formula, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("clause width {k} exceeds the {n} available variables")]
    WidthTooLarge { k: usize, n: usize },
    #[error("invalid generator parameter: {0}")]
    Invalid(String),
}

/// Uniform random k-CNF: `m` clauses over `n` variables, each with `k`
/// distinct variables and uniformly random signs.
pub fn random_kcnf(n: usize, m: usize, k: usize, seed: u64) -> Result<Formula, GenError> {
    if k > n {
        return Err(GenError::WidthTooLarge { k, n });
    }
    if k == 0 {
        return Err(GenError::Invalid("clause width must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            let vars = sample(&mut rng, n, k);
            Expr::Or(vars.iter().map(|v| Expr::lit(Var(v as u32).lit(rng.gen_bool(0.5)))).collect())
        })
        .collect();
    Ok(Formula::with_vars(&Expr::And(clauses), n).expect("variables drawn below n"))
}

/// Relative weights of the node kinds drawn above the bottom level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpWeights {
    /// Stop early with a literal.
    pub leaf: f64,
    pub not: f64,
    pub and: f64,
    pub or: f64,
    pub implies: f64,
    pub iff: f64,
}

impl Default for OpWeights {
    fn default() -> Self {
        OpWeights { leaf: 0.2, not: 0.1, and: 0.25, or: 0.25, implies: 0.1, iff: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaParams {
    /// Maximum depth; depth 1 is a single literal.
    pub depth: usize,
    /// Maximum arity of conjunctions and disjunctions (at least 2).
    pub arity: usize,
    pub vars: usize,
    #[serde(default)]
    pub weights: OpWeights,
}

/// Random formula tree: literals at the leaves, internal nodes drawn by
/// `weights`, n-ary arity uniform in `[2, arity]`.
pub fn random_formula(params: &FormulaParams, seed: u64) -> Result<Formula, GenError> {
    if params.depth == 0 {
        return Err(GenError::Invalid("depth must be at least 1".into()));
    }
    if params.vars == 0 {
        return Err(GenError::Invalid("need at least one variable".into()));
    }
    if params.arity < 2 {
        return Err(GenError::Invalid("arity must be at least 2".into()));
    }
    let w = params.weights;
    let weights = [w.leaf, w.not, w.and, w.or, w.implies, w.iff];
    let kinds = if weights.iter().skip(1).any(|&x| x > 0.0) {
        Some(WeightedIndex::new(weights).map_err(|e| GenError::Invalid(e.to_string()))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expr = grow(params, kinds.as_ref(), params.depth, &mut rng);
    Ok(Formula::with_vars(&expr, params.vars).expect("variables drawn below n"))
}

fn grow(p: &FormulaParams, kinds: Option<&WeightedIndex<f64>>, depth: usize, rng: &mut ChaCha8Rng) -> Expr {
    let literal = |rng: &mut ChaCha8Rng| {
        let v = Var(rng.gen_range(0..p.vars) as u32);
        Expr::lit(v.lit(rng.gen_bool(0.5)))
    };
    let Some(kinds) = kinds.filter(|_| depth > 1) else {
        return literal(rng);
    };
    let sub = |rng: &mut ChaCha8Rng| grow(p, Some(kinds), depth - 1, rng);
    match kinds.sample(rng) {
        0 => literal(rng),
        1 => Expr::negate(sub(rng)),
        k @ (2 | 3) => {
            let n = rng.gen_range(2..=p.arity);
            let children = (0..n).map(|_| sub(rng)).collect();
            if k == 2 {
                Expr::And(children)
            } else {
                Expr::Or(children)
            }
        }
        4 => {
            let a = sub(rng);
            Expr::implies(a, sub(rng))
        }
        _ => {
            let a = sub(rng);
            Expr::iff(a, sub(rng))
        }
    }
}
