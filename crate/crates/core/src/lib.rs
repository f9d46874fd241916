//! GSAT-style stochastic local search run directly on non-clausal
//! propositional formulas.
//!
//! The score of an assignment is the number of clauses of the formula's
//! standard clausal form that it falsifies. [`score`] computes that number on
//! the formula tree in one linear pass and keeps it up to date across flips,
//! so [`search::gsat_run`] never has to build the (possibly exponential)
//! clause set. The clausal backend in [`search`] runs the same loop over an
//! explicit clause set and makes exactly the same moves.

pub mod cnf;
pub mod formula;
pub mod gen;
pub mod oracle;
pub mod score;
pub mod search;

pub use cnf::{cnf_definitional, cnf_standard, count_false_clauses, Clause, ClauseSet, Definitional};
pub use formula::{parse_dimacs, parse_formula, Assignment, Expr, Formula, Lit, Node, NodeId, Var};
pub use score::{eval_scores, ScorePair, ScoreState};
pub use search::{gsat_run, Backend, Outcome, SearchConfig, SearchResult, Variant};
