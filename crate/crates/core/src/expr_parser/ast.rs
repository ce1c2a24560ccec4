use std::fmt;

use crate::jets::{Jet2, JetError};

use super::EvalError;

/// Location of a node in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    S,
    T,
    /// Complex variable, only accepted where explicitly enabled.
    Z,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::S => "s",
            Var::T => "t",
            Var::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sinh,
    Cosh,
    Sin,
    Cos,
    Tan,
    Log,
    Sqrt,
    Pow,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Sinh,
        Func::Cosh,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Log,
        Func::Sqrt,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Expression tree node. Equality ignores source locations.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn literal(v: f64) -> Self {
        Self::new(ExprKind::Literal(v), Span::default())
    }

    /// Evaluate on jets of the coordinate functions.
    pub fn eval_jet(&self, s: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        let at = |source: JetError| EvalError {
            span: self.span,
            source,
        };
        Ok(match &self.kind {
            ExprKind::Literal(v) => Jet2::constant(*v),
            ExprKind::Var(Var::S) => s,
            ExprKind::Var(Var::T) => t,
            ExprKind::Var(Var::Z) => {
                return Err(at(JetError::Singularity {
                    op: "complex variable in real expression",
                    value: f64::NAN,
                }))
            }
            ExprKind::Const(Constant::Pi) => Jet2::constant(std::f64::consts::PI),
            ExprKind::Const(Constant::E) => Jet2::constant(std::f64::consts::E),
            ExprKind::Neg(a) => -a.eval_jet(s, t)?,
            ExprKind::Binary(op, a, b) => {
                let (a, b) = (a.eval_jet(s, t)?, b.eval_jet(s, t)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(b).map_err(at)?,
                    BinOp::Pow => a.pow(&b).map_err(at)?,
                }
            }
            ExprKind::Call(f, args) => {
                let a = args[0].eval_jet(s, t)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan().map_err(at)?,
                    Func::Log => a.ln().map_err(at)?,
                    Func::Sqrt => a.sqrt().map_err(at)?,
                    Func::Pow => a.pow(&args[1].eval_jet(s, t)?).map_err(at)?,
                }
            }
        })
    }

    /// Plain value at a point.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64, EvalError> {
        self.eval_jet(Jet2::constant(s), Jet2::constant(t))
            .map(|j| j.val)
    }

    pub fn uses_variables(&self) -> bool {
        match &self.kind {
            ExprKind::Var(_) => true,
            ExprKind::Literal(_) | ExprKind::Const(_) => false,
            ExprKind::Neg(a) => a.uses_variables(),
            ExprKind::Binary(_, a, b) => a.uses_variables() || b.uses_variables(),
            ExprKind::Call(_, args) => args.iter().any(Expr::uses_variables),
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Literal(v) if v.is_sign_negative() => 3,
            ExprKind::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

/// Prints with the minimum parentheses needed to parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match &self.kind {
            ExprKind::Literal(v) => write!(f, "{v}"),
            ExprKind::Var(v) => f.write_str(v.name()),
            ExprKind::Const(Constant::Pi) => f.write_str("pi"),
            ExprKind::Const(Constant::E) => f.write_str("e"),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < 4)
            }
            ExprKind::Binary(BinOp::Pow, a, b) => {
                wrap(f, a, a.precedence() < 4)?;
                f.write_str("^")?;
                wrap(f, b, b.precedence() < 5)
            }
            ExprKind::Binary(op, a, b) => {
                let p = self.precedence();
                wrap(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, b, b.precedence() <= p)
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
