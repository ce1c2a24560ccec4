use super::ast::{BinOp, Constant, Expr, ExprKind, Func, Span, Var};
use super::lexer::{Tok, Token};
use super::{ParseError, SurfaceDefinition};
use crate::surface_catalog::{AmbientSpace, Domain};

pub(super) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    allow_z: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(tokens: Vec<Token>, allow_z: bool) -> Self {
        Self {
            tokens,
            pos: 0,
            allow_z,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_separator(&self) -> bool {
        matches!(self.peek().tok, Tok::Sep | Tok::Semicolon | Tok::Eof)
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek().tok, Tok::Sep | Tok::Semicolon) {
            self.next();
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Token> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(ParseError::new(
                t.span,
                format!("expected {what}, found {}", t.tok.describe()),
            ))
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        if self.at_separator() {
            return Ok(());
        }
        let t = self.peek().clone();
        let msg = match t.tok {
            Tok::Ident(_) | Tok::Number(_) | Tok::LParen => format!(
                "unexpected {} (implicit multiplication is not supported; write '*')",
                t.tok.describe()
            ),
            _ => format!("unexpected {}", t.tok.describe()),
        };
        Err(ParseError::new(t.span, msg))
    }

    /// A single expression followed by end of input.
    pub fn parse_standalone(&mut self) -> PResult<Expr> {
        self.skip_separators();
        let e = self.expr()?;
        self.skip_separators();
        match self.peek().tok {
            Tok::Eof => Ok(e),
            _ => {
                self.end_of_statement()?;
                let t = self.peek().clone();
                Err(ParseError::new(
                    t.span,
                    format!("unexpected {}", t.tok.describe()),
                ))
            }
        }
    }

    pub fn parse_surface(&mut self, name: &str) -> PResult<SurfaceDefinition> {
        self.skip_separators();
        let ambient = self.ambient()?;
        self.end_of_statement()?;
        self.skip_separators();

        let mut domain = Domain::default();
        if matches!(&self.peek().tok, Tok::Ident(id) if id == "domain") {
            domain = self.domain()?;
            self.end_of_statement()?;
            self.skip_separators();
        }

        let dim = ambient.dim();
        let mut components = Vec::with_capacity(dim);
        while !matches!(self.peek().tok, Tok::Eof) {
            let head = self.next();
            let expected = format!("x{}", components.len() + 1);
            match &head.tok {
                Tok::Ident(id) if *id == expected => {}
                Tok::Ident(id) if id == "ambient" || id == "domain" => {
                    return Err(ParseError::new(
                        head.span,
                        format!("'{id}' must appear once, before the components"),
                    ))
                }
                Tok::Ident(id) if is_component_name(id) => {
                    let msg = if components.len() >= dim {
                        format!("component {id} exceeds ambient dimension {dim}")
                    } else {
                        format!("expected component {expected}, found {id}")
                    };
                    return Err(ParseError::new(head.span, msg));
                }
                other => {
                    return Err(ParseError::new(
                        head.span,
                        format!("expected component {expected}, found {}", other.describe()),
                    ))
                }
            }
            if components.len() >= dim {
                return Err(ParseError::new(
                    head.span,
                    format!("component {expected} exceeds ambient dimension {dim}"),
                ));
            }
            self.expect(Tok::Equals, "'='")?;
            components.push(self.expr()?);
            self.end_of_statement()?;
            self.skip_separators();
        }
        if components.len() != dim {
            let span = self.peek().span;
            return Err(ParseError::new(
                span,
                format!(
                    "component-count mismatch: ambient {} needs {dim} components, found {}",
                    ambient.descriptor(),
                    components.len()
                ),
            ));
        }
        Ok(SurfaceDefinition {
            name: name.to_string(),
            ambient,
            components,
            domain,
        })
    }

    fn ambient(&mut self) -> PResult<AmbientSpace> {
        let head = self.next();
        if !matches!(&head.tok, Tok::Ident(id) if id == "ambient") {
            return Err(ParseError::new(
                head.span,
                format!("expected 'ambient' header, found {}", head.tok.describe()),
            ));
        }
        let kind = self.next();
        let kind_name = match &kind.tok {
            Tok::Ident(k) if k == "E" || k == "S" || k == "H" => k.clone(),
            other => {
                return Err(ParseError::new(
                    kind.span,
                    format!(
                        "expected ambient kind E, S or H, found {}",
                        other.describe()
                    ),
                ))
            }
        };
        self.expect(Tok::LParen, "'('")?;
        let t = self.small_integer()?;
        self.expect(Tok::Comma, "','")?;
        let p = self.small_integer()?;
        let curvature = if matches!(self.peek().tok, Tok::Semicolon) {
            self.next();
            let e = self.expr()?;
            Some((self.constant_value(&e)?, e.span))
        } else {
            None
        };
        let close = self.expect(Tok::RParen, "')'")?;

        let bad = |msg: String| Err(ParseError::new(kind.span, msg));
        match (kind_name.as_str(), curvature) {
            ("E", None) if (t, p) == (2, 2) => Ok(AmbientSpace::flat()),
            ("E", None) => bad(format!("unsupported flat ambient E({t},{p}); only E(2,2)")),
            ("E", Some((_, span))) => Err(ParseError::new(
                span,
                "flat ambient takes no curvature".to_string(),
            )),
            ("S", Some((c, span))) => {
                if (t, p) != (2, 3) {
                    return bad(format!(
                        "unsupported pseudo-sphere S({t},{p}); only S(2,3; c)"
                    ));
                }
                AmbientSpace::pseudo_sphere(c).map_err(|e| ParseError::new(span, e.to_string()))
            }
            ("H", Some((c, span))) => {
                if (t, p) != (3, 2) {
                    return bad(format!(
                        "unsupported pseudo-hyperbolic space H({t},{p}); only H(3,2; c)"
                    ));
                }
                AmbientSpace::pseudo_hyperbolic(c).map_err(|e| ParseError::new(span, e.to_string()))
            }
            (k, None) => Err(ParseError::new(
                close.span,
                format!("ambient {k} needs a curvature: {k}(t,p; c)"),
            )),
            _ => unreachable!(),
        }
    }

    fn small_integer(&mut self) -> PResult<usize> {
        let t = self.next();
        match t.tok {
            Tok::Number(v) if v.fract() == 0.0 && (0.0..=16.0).contains(&v) => Ok(v as usize),
            other => Err(ParseError::new(
                t.span,
                format!(
                    "expected a small non-negative integer, found {}",
                    other.describe()
                ),
            )),
        }
    }

    fn domain(&mut self) -> PResult<Domain> {
        let head = self.next();
        let bound = |p: &mut Self| -> PResult<f64> {
            let e = p.expr()?;
            p.constant_value(&e)
        };
        let s0 = bound(self)?;
        self.expect(Tok::Colon, "':'")?;
        let s1 = bound(self)?;
        self.expect(Tok::Comma, "','")?;
        let t0 = bound(self)?;
        self.expect(Tok::Colon, "':'")?;
        let t1 = bound(self)?;
        Domain::new(s0, s1, t0, t1).map_err(|e| ParseError::new(head.span, e.to_string()))
    }

    fn constant_value(&self, e: &Expr) -> PResult<f64> {
        if e.uses_variables() {
            return Err(ParseError::new(
                e.span,
                "expected a constant expression".to_string(),
            ));
        }
        let v = e
            .eval(0.0, 0.0)
            .map_err(|err| ParseError::new(err.span, err.source.to_string()))?;
        if !v.is_finite() {
            return Err(ParseError::new(e.span, format!("non-finite constant {v}")));
        }
        Ok(v)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.next().span;
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.next().span;
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek().tok, Tok::Minus) {
            let span = self.next().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut base = self.primary()?;
        while matches!(self.peek().tok, Tok::Caret) {
            let span = self.next().span;
            let exponent = self.exponent()?;
            base = Expr::new(
                ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            );
        }
        Ok(base)
    }

    fn exponent(&mut self) -> PResult<Expr> {
        if matches!(self.peek().tok, Tok::Minus) {
            let span = self.next().span;
            let inner = self.exponent()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let idx = self.pos;
        let t = self.next();
        match t.tok {
            Tok::Number(v) => Ok(Expr::new(ExprKind::Literal(v), t.span)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, t.span),
            Tok::Sep | Tok::Semicolon | Tok::Eof | Tok::RParen | Tok::Comma | Tok::Colon => {
                // Point at the operator left dangling, if there is one.
                let dangling = idx.checked_sub(1).map(|i| &self.tokens[i]).filter(|p| {
                    matches!(
                        p.tok,
                        Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret
                    )
                });
                match dangling {
                    Some(op) => Err(ParseError::new(
                        op.span,
                        format!("expected an operand after {}", op.tok.describe()),
                    )),
                    None => Err(ParseError::new(
                        t.span,
                        format!("expected an expression, found {}", t.tok.describe()),
                    )),
                }
            }
            other => Err(ParseError::new(
                t.span,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }

    fn identifier(&mut self, name: String, span: Span) -> PResult<Expr> {
        if let Some(func) = Func::from_name(&name) {
            if !matches!(self.peek().tok, Tok::LParen) {
                return Err(ParseError::new(
                    span,
                    format!("function '{name}' must be called with parentheses"),
                ));
            }
            self.next();
            let mut args = vec![self.expr()?];
            while matches!(self.peek().tok, Tok::Comma) {
                self.next();
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen, "')'")?;
            if args.len() != func.arity() {
                return Err(ParseError::new(
                    span,
                    format!(
                        "function '{name}' takes {} argument(s), found {}",
                        func.arity(),
                        args.len()
                    ),
                ));
            }
            return Ok(Expr::new(ExprKind::Call(func, args), span));
        }
        let kind = match name.as_str() {
            "s" => ExprKind::Var(Var::S),
            "t" => ExprKind::Var(Var::T),
            "z" if self.allow_z => ExprKind::Var(Var::Z),
            "pi" => ExprKind::Const(Constant::Pi),
            "e" => ExprKind::Const(Constant::E),
            _ => {
                let msg = if name.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                    format!("unknown identifier '{name}' (identifiers are lower case)")
                } else {
                    format!("unknown identifier '{name}'")
                };
                return Err(ParseError::new(span, msg));
            }
        };
        Ok(Expr::new(kind, span))
    }
}

fn is_component_name(id: &str) -> bool {
    id.len() > 1 && id.starts_with('x') && id[1..].chars().all(|c| c.is_ascii_digit())
}
