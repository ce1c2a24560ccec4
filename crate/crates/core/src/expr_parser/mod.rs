//! Plain-text surface definitions.
//!
//! ```text
//! ambient H(3,2; -1)
//! domain -1:1, -1:1
//! x1 = sinh(2*s/sqrt(3)) - t^2/3 - (7/8 + t^4/18)*exp(2*s/sqrt(3))
//! x2 = ...
//! ```
//!
//! Statements are separated by newlines or `;`. `#` starts a comment.
//! Precedence, tightest first: `^`, unary `-`, `* /`, `+ -`; all binary
//! operators associate to the left. There is no implicit multiplication.

mod ast;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{BinOp, Constant, Expr, ExprKind, Func, Span, Var};

use crate::jets::{Jet2, JetError};
use crate::surface_catalog::{AmbientSpace, Domain};

/// Syntax or semantic error, displayed as `line:col: message`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: String) -> Self {
        Self { span, message }
    }
}

/// A jet singularity raised while evaluating the node at `span`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {source}")]
pub struct EvalError {
    pub span: Span,
    pub source: JetError,
}

/// A parsed immersion: one expression per ambient coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDefinition {
    pub name: String,
    pub ambient: AmbientSpace,
    pub components: Vec<Expr>,
    pub domain: Domain,
}

impl SurfaceDefinition {
    pub fn eval_on_jets(&self, s: Jet2, t: Jet2) -> Result<Vec<Jet2>, EvalError> {
        self.components.iter().map(|c| c.eval_jet(s, t)).collect()
    }
}

impl fmt::Display for SurfaceDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ambient {}", self.ambient.descriptor())?;
        let d = &self.domain;
        writeln!(f, "domain {}:{}, {}:{}", d.s0, d.s1, d.t0, d.t1)?;
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "x{} = {c}", i + 1)?;
        }
        Ok(())
    }
}

pub fn parse_surface(text: &str) -> Result<SurfaceDefinition, ParseError> {
    parse_surface_named("user", text)
}

pub fn parse_surface_named(name: &str, text: &str) -> Result<SurfaceDefinition, ParseError> {
    let tokens = lexer::tokenize(text)?;
    parser::Parser::new(tokens, false).parse_surface(name)
}

/// Parse one expression in `s` and `t`.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = lexer::tokenize(text)?;
    parser::Parser::new(tokens, false).parse_standalone()
}

/// Parse one expression in the complex variable `z`.
pub fn parse_complex_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = lexer::tokenize(text)?;
    let e = parser::Parser::new(tokens, true).parse_standalone()?;
    check_only_z(&e)?;
    Ok(e)
}

fn check_only_z(e: &Expr) -> Result<(), ParseError> {
    match &e.kind {
        ExprKind::Var(Var::S | Var::T) => Err(ParseError::new(
            e.span,
            "only the variable z is allowed here".to_string(),
        )),
        ExprKind::Neg(a) => check_only_z(a),
        ExprKind::Binary(_, a, b) => check_only_z(a).and(check_only_z(b)),
        ExprKind::Call(_, args) => args.iter().try_for_each(check_only_z),
        _ => Ok(()),
    }
}

/// Evaluate an expression tree on coordinate jets.
pub fn eval_on_jets(ast: &Expr, s: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
    ast.eval_jet(s, t)
}
