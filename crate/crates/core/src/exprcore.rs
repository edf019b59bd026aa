//! Scalar expressions in one variable `x`: parsing, printing, evaluation and
//! exact symbolic differentiation.
//!
//! Grammar (infix, standard precedence, `^` right associative):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | 'x' | 'pi' | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Note that unary minus binds tighter than `^`, so `-x^2` is `(-x)^2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log => "log",
        }
    }

    fn from_ident(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "sqrt" => UnaryOp::Sqrt,
            "log" => UnaryOp::Log,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Expression tree. Immutable once built; subtrees are shared.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Pi,
    Var,
    Unary(UnaryOp, Arc<ExprAst>),
    Binary(BinaryOp, Arc<ExprAst>, Arc<ExprAst>),
}

use ExprAst::*;

impl ExprAst {
    pub fn constant(v: f64) -> Self {
        Const(v)
    }

    pub fn unary(op: UnaryOp, arg: ExprAst) -> Self {
        Unary(op, Arc::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: ExprAst, rhs: ExprAst) -> Self {
        Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    /// True when the tree does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Const(_) | Pi => true,
            Var => false,
            Unary(_, a) => a.is_constant(),
            Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn as_literal(&self) -> Option<f64> {
        match self {
            Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Const(_) | Pi | Var => 1,
            Unary(_, a) => 1 + a.size(),
            Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Evaluates at `x`, reporting domain violations.
    pub fn eval<T: Real>(&self, x: T) -> Result<T> {
        Ok(match self {
            Const(v) => T::lit(*v),
            Pi => T::PI(),
            Var => x,
            Unary(op, a) => {
                let v = a.eval(x)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Sqrt => {
                        if v < T::zero() {
                            return Err(Error::Domain(format!("sqrt of negative value {v}")));
                        }
                        v.sqrt()
                    }
                    UnaryOp::Log => {
                        if v <= T::zero() {
                            return Err(Error::Domain(format!("log of non-positive value {v}")));
                        }
                        v.ln()
                    }
                }
            }
            Binary(op, a, b) => {
                let u = a.eval(x)?;
                let v = b.eval(x)?;
                match op {
                    BinaryOp::Add => u + v,
                    BinaryOp::Sub => u - v,
                    BinaryOp::Mul => u * v,
                    BinaryOp::Div => {
                        if v == T::zero() {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        u / v
                    }
                    BinaryOp::Pow => {
                        let r = u.powf(v);
                        if r.is_nan() {
                            return Err(Error::Domain(format!("{u}^{v} is undefined")));
                        }
                        r
                    }
                }
            }
        })
    }

    /// Evaluation without domain checks; invalid operations yield NaN or
    /// infinities. Used in inner loops on already-validated expressions.
    #[inline]
    pub fn value<T: Real>(&self, x: T) -> T {
        match self {
            Const(v) => T::lit(*v),
            Pi => T::PI(),
            Var => x,
            Unary(op, a) => {
                let v = a.value(x);
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Sqrt => v.sqrt(),
                    UnaryOp::Log => v.ln(),
                }
            }
            Binary(op, a, b) => {
                let u = a.value(x);
                let v = b.value(x);
                match op {
                    BinaryOp::Add => u + v,
                    BinaryOp::Sub => u - v,
                    BinaryOp::Mul => u * v,
                    BinaryOp::Div => u / v,
                    BinaryOp::Pow => u.powf(v),
                }
            }
        }
    }

    /// Exact derivative with respect to `x`. Only trivial constant folding is
    /// applied, so the result may be larger than necessary.
    pub fn diff(&self) -> ExprAst {
        match self {
            Const(_) | Pi => Const(0.0),
            Var => Const(1.0),
            Unary(op, a) => {
                let da = a.diff();
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => neg(da),
                    UnaryOp::Sin => mul(ExprAst::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => mul(neg(ExprAst::unary(UnaryOp::Sin, a)), da),
                    UnaryOp::Exp => mul(ExprAst::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Sqrt => div(da, mul(Const(2.0), ExprAst::unary(UnaryOp::Sqrt, a))),
                    UnaryOp::Log => div(da, a),
                }
            }
            Binary(op, a, b) => {
                let (ua, ub) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => add(a.diff(), b.diff()),
                    BinaryOp::Sub => sub(a.diff(), b.diff()),
                    BinaryOp::Mul => add(mul(a.diff(), ub), mul(ua, b.diff())),
                    BinaryOp::Div => div(
                        sub(mul(a.diff(), ub.clone()), mul(ua, b.diff())),
                        mul(ub.clone(), ub),
                    ),
                    BinaryOp::Pow => {
                        if b.is_constant() {
                            // d(u^k) = k u^(k-1) u'
                            let km1 = match ub.as_literal() {
                                Some(k) => Const(k - 1.0),
                                None => sub(ub.clone(), Const(1.0)),
                            };
                            mul(mul(ub, pow(ua, km1)), a.diff())
                        } else {
                            // d(u^v) = u^v (v' ln u + v u'/u)
                            let this = self.clone();
                            let ln_u = ExprAst::unary(UnaryOp::Log, ua.clone());
                            mul(
                                this,
                                add(mul(b.diff(), ln_u), div(mul(ub, a.diff()), ua)),
                            )
                        }
                    }
                }
            }
        }
    }
}

fn is_lit(e: &ExprAst, v: f64) -> bool {
    e.as_literal() == Some(v)
}

fn neg(a: ExprAst) -> ExprAst {
    match a.as_literal() {
        Some(v) => Const(-v),
        None => ExprAst::unary(UnaryOp::Neg, a),
    }
}

fn add(a: ExprAst, b: ExprAst) -> ExprAst {
    if is_lit(&a, 0.0) {
        b
    } else if is_lit(&b, 0.0) {
        a
    } else {
        ExprAst::binary(BinaryOp::Add, a, b)
    }
}

fn sub(a: ExprAst, b: ExprAst) -> ExprAst {
    if is_lit(&b, 0.0) {
        a
    } else if is_lit(&a, 0.0) {
        neg(b)
    } else {
        ExprAst::binary(BinaryOp::Sub, a, b)
    }
}

fn mul(a: ExprAst, b: ExprAst) -> ExprAst {
    if is_lit(&a, 0.0) || is_lit(&b, 0.0) {
        Const(0.0)
    } else if is_lit(&a, 1.0) {
        b
    } else if is_lit(&b, 1.0) {
        a
    } else {
        ExprAst::binary(BinaryOp::Mul, a, b)
    }
}

fn div(a: ExprAst, b: ExprAst) -> ExprAst {
    if is_lit(&a, 0.0) {
        Const(0.0)
    } else if is_lit(&b, 1.0) {
        a
    } else {
        ExprAst::binary(BinaryOp::Div, a, b)
    }
}

fn pow(a: ExprAst, b: ExprAst) -> ExprAst {
    if is_lit(&b, 1.0) {
        a
    } else if is_lit(&b, 0.0) {
        Const(1.0)
    } else {
        ExprAst::binary(BinaryOp::Pow, a, b)
    }
}

/// Fully parenthesised rendering that parses back to an equivalent tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Pi => f.write_str("pi"),
            Var => f.write_str("x"),
            Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Unary(op, a) => write!(f, "{}({a})", op.name()),
            Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

/// Parses an expression in the variable `x`.
pub fn parse_expr(text: &str) -> Result<ExprAst> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ExprAst::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = ExprAst::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<ExprAst> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(ExprAst::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ExprAst> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let a = self.atom()?;
            return Ok(ExprAst::unary(UnaryOp::Neg, a));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "x" => Ok(Var),
                    "pi" => Ok(Pi),
                    _ => match UnaryOp::from_ident(name) {
                        Some(op) => {
                            self.expect(b'(')?;
                            let arg = self.expr()?;
                            self.expect(b')')?;
                            Ok(ExprAst::unary(op, arg))
                        }
                        None => Err(Error::UnknownIdentifier {
                            name: name.to_string(),
                            offset: start,
                        }),
                    },
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<ExprAst> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Const).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }
}
