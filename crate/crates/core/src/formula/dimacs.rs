use thiserror::Error;

use super::{Expr, Formula, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed problem line, expected `p cnf <vars> <clauses>`")]
    MalformedHeader { line: usize },
    #[error("missing `p cnf` problem line")]
    MissingHeader,
    #[error("line {line}: clause data before the problem line")]
    DataBeforeHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("last clause is not terminated by 0")]
    MissingTerminator,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
}

/// Parses DIMACS CNF into a conjunction of disjunctions. Unit clauses become
/// bare literals, an empty clause becomes `0`, and variables are named
/// `x1 .. xN` after their DIMACS numbers.
pub fn parse_dimacs(text: &str) -> Result<Formula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        // SATLIB files end with a `%` line.
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            match (parsed, header) {
                (Some(h), None) => header = Some(h),
                _ => return Err(DimacsError::MalformedHeader { line }),
            }
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::DataBeforeHeader { line });
        };
        for token in trimmed.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadToken { line, token: token.to_string() })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::LiteralOutOfRange { line, lit, num_vars });
            }
            current.push(lit);
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch { declared, found: clauses.len() });
    }

    let to_expr = |lit: i64| {
        let v = Expr::Var(Var(lit.unsigned_abs() as u32 - 1));
        if lit > 0 {
            v
        } else {
            Expr::negate(v)
        }
    };
    let conjuncts = clauses.into_iter().map(|c| Expr::Or(c.into_iter().map(to_expr).collect())).collect();
    let names = (1..=num_vars).map(|i| format!("x{i}")).collect();
    Ok(Formula::new(&Expr::And(conjuncts), names).expect("literals were range-checked"))
}
