//! Infix formula language.
//!
//! ```text
//! iff  := imp ("<->" imp)?
//! imp  := or ("->" imp)?
//! or   := and ("|" and)*
//! and  := not ("&" not)*
//! not  := "!" not | atom
//! atom := ident | "1" | "0" | "(" iff ")"
//! ```
//!
//! `<->` does not chain: `a <-> b <-> c` is rejected, since the clause count
//! of nested equivalences depends on how they are parenthesized.

use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, Formula, Node, NodeId, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`1`".into(),
            Tok::False => "`0`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' | ')' | '!' | '&' | '|' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    _ => Tok::Pipe,
                };
                advance(1, &mut i);
                out.push(Spanned { tok, line: start_line, column: start_col });
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                advance(2, &mut i);
                out.push(Spanned { tok: Tok::Arrow, line: start_line, column: start_col });
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                advance(3, &mut i);
                out.push(Spanned { tok: Tok::DoubleArrow, line: start_line, column: start_col });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "1" => Tok::True,
                    "0" => Tok::False,
                    w if is_identifier(w) => Tok::Ident(word),
                    _ => {
                        return Err(syntax(
                            start_line,
                            start_col,
                            format!("invalid token `{word}`; identifiers start with a letter or `_`"),
                        ))
                    }
                };
                advance(j - i, &mut i);
                out.push(Spanned { tok, line: start_line, column: start_col });
            }
            other => return Err(syntax(start_line, start_col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        syntax(s.line, s.column, message)
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.imp()?;
        if *self.peek() != Tok::DoubleArrow {
            return Ok(lhs);
        }
        self.bump();
        let rhs = self.imp()?;
        if *self.peek() == Tok::DoubleArrow {
            return Err(self.error_here("`<->` does not chain; add parentheses"));
        }
        Ok(Expr::iff(lhs, rhs))
    }

    fn imp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if *self.peek() != Tok::Arrow {
            return Ok(lhs);
        }
        self.bump();
        let rhs = self.imp()?;
        Ok(Expr::implies(lhs, rhs))
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.and()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.not()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            items.push(self.not()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn not(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Expr::negate(self.not()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let next = self.names.len() as u32;
                let id = *self.ids.entry(name.clone()).or_insert_with(|| {
                    self.names.push(name);
                    next
                });
                Ok(Expr::Var(Var(id)))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Const(true))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Const(false))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error_here(format!("expected `)`, found {}", self.peek().describe())));
                }
                self.bump();
                Ok(inner)
            }
            other => Err(self.error_here(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses the infix formula language. Variables get dense ids in order of
/// first occurrence.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    if toks.len() == 1 {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks, pos: 0, names: Vec::new(), ids: HashMap::new() };
    let expr = p.iff()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
    }
    Ok(Formula::new(&expr, p.names).expect("parser only produces declared variables"))
}

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Iff(..) => 1,
        Node::Implies(..) => 2,
        Node::Or(_) => 3,
        Node::And(_) => 4,
        Node::Not(_) | Node::Lit(_) | Node::Const(_) => 5,
    }
}

fn render_child(f: &Formula, id: NodeId, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        render_node(f, id, out);
        out.push(')');
    } else {
        render_node(f, id, out);
    }
}

pub(crate) fn render_node(f: &Formula, id: NodeId, out: &mut String) {
    let prec = |c: NodeId| precedence(f.node(c));
    match f.node(id) {
        Node::Lit(l) => {
            if !l.is_positive() {
                out.push('!');
            }
            out.push_str(f.name(l.var()));
        }
        Node::Const(b) => out.push(if *b { '1' } else { '0' }),
        Node::Not(c) => {
            out.push('!');
            render_child(f, *c, prec(*c) < 5, out);
        }
        Node::And(cs) | Node::Or(cs) => {
            let (sep, level) = match f.node(id) {
                Node::And(_) => (" & ", 4),
                _ => (" | ", 3),
            };
            for (i, &c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                render_child(f, c, prec(c) <= level, out);
            }
        }
        Node::Implies(a, b) => {
            render_child(f, *a, prec(*a) <= 2, out);
            out.push_str(" -> ");
            render_child(f, *b, prec(*b) < 2, out);
        }
        Node::Iff(a, b) => {
            render_child(f, *a, prec(*a) <= 1, out);
            out.push_str(" <-> ");
            render_child(f, *b, prec(*b) <= 1, out);
        }
    }
}
