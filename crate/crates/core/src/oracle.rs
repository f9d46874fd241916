//! Brute-force ground truth: exhaustive enumeration, scores read off the
//! standard conversion, and delta tables by re-scoring every neighbour.
//!
//! Nothing here touches [`crate::score`]; the only shared code is the formula
//! and clause representations.

use thiserror::Error;

use crate::cnf::{cnf_standard, count_false_clauses, ClauseSet, CnfError};
use crate::formula::{Assignment, Formula, Var};

/// Largest variable count [`enumerate`] accepts (2^20 assignments).
pub const MAX_ENUMERATION_VARS: usize = 20;

/// Largest variable count [`enumerate_clauses`] accepts.
pub const MAX_CLAUSE_ENUMERATION_VARS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the enumeration limit of {limit}")]
    TooManyVars { vars: usize, limit: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub satisfiable: bool,
    pub model_count: u64,
    /// First model in lexicographic order (variable 0 most significant).
    pub first_model: Option<Assignment>,
}

/// Evaluates `f` under all `2^num_vars` assignments.
pub fn enumerate(f: &Formula) -> Result<Enumeration, OracleError> {
    let n = f.num_vars();
    if n > MAX_ENUMERATION_VARS {
        return Err(OracleError::TooManyVars { vars: n, limit: MAX_ENUMERATION_VARS });
    }
    let mut model_count = 0;
    let mut first_model = None;
    for index in 0..1u64 << n {
        let t = Assignment::from_index(n, index);
        if f.evaluate(&t) {
            model_count += 1;
            first_model.get_or_insert(t);
        }
    }
    Ok(Enumeration { satisfiable: model_count > 0, model_count, first_model })
}

/// Number of clauses of the standard conversion of `f` falsified by `t`.
pub fn score_by_definition(f: &Formula, t: &Assignment) -> Result<usize, OracleError> {
    let cs = cnf_standard(f)?;
    Ok(count_false_clauses(&cs, t)?)
}

/// `score(t with v flipped) - score(t)` for every variable, from the clause
/// set alone.
pub fn delta_table_brute(f: &Formula, t: &Assignment) -> Result<Vec<i64>, OracleError> {
    let cs = cnf_standard(f)?;
    delta_table_clauses(&cs, t)
}

/// [`delta_table_brute`] for an already converted clause set.
pub fn delta_table_clauses(cs: &ClauseSet, t: &Assignment) -> Result<Vec<i64>, OracleError> {
    let base = count_false_clauses(cs, t)? as i64;
    (0..cs.num_vars())
        .map(|i| {
            let flipped = t.flipped(Var(i as u32));
            Ok(count_false_clauses(cs, &flipped)? as i64 - base)
        })
        .collect()
}

/// Every model of a clause set, by enumeration over packed bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseModels {
    pub num_vars: usize,
    pub models: Vec<Assignment>,
}

/// Enumerates all models of `cs` in lexicographic order.
pub fn enumerate_clauses(cs: &ClauseSet) -> Result<ClauseModels, OracleError> {
    let n = cs.num_vars();
    if n > MAX_CLAUSE_ENUMERATION_VARS {
        return Err(OracleError::TooManyVars { vars: n, limit: MAX_CLAUSE_ENUMERATION_VARS });
    }
    // Variable j lives at bit n-1-j so that counting up is lexicographic.
    let bit = |v: Var| 1u64 << (n - 1 - v.index());
    let masks: Vec<(u64, u64)> = cs
        .clauses()
        .iter()
        .map(|c| {
            c.lits().iter().fold((0, 0), |(pos, neg), l| {
                if l.is_positive() {
                    (pos | bit(l.var()), neg)
                } else {
                    (pos, neg | bit(l.var()))
                }
            })
        })
        .collect();
    let models = (0..1u64 << n)
        .filter(|&t| masks.iter().all(|&(pos, neg)| pos & t != 0 || neg & !t != 0))
        .map(|t| Assignment::from_index(n, t))
        .collect();
    Ok(ClauseModels { num_vars: n, models })
}
