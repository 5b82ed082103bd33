//! Two-variable function expressions: parsing, printing, symbolic partial
//! derivatives and interval enclosures.
//!
//! Grammar (left associative, `^` binds tightest):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' exponent)?
//! base   := 'x' | 'y' | number | '(' expr ')' | '-' factor
//! exponent := ['-'] number | '(' ['-'] number ['/' number] ')'
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{default_denom_bound, NumError, RatInterval, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero exponent at {pos}")]
    ZeroExponent { pos: usize },
    #[error(transparent)]
    Domain(#[from] NumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
}

/// Expression tree. Build through the associated constructors, which fold
/// constants and drop neutral elements; printed text re-parses to the same
/// tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    X,
    Y,
    Const(Rational),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
    Neg(Box<Expr>),
}

/// Enclosures of both partial derivatives over `rect = (I, J)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradEnclosure {
    pub dx: RatInterval,
    pub dy: RatInterval,
    pub rect: (RatInterval, RatInterval),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(v: Var) -> Expr {
        match v {
            Var::X => Expr::X,
            Var::Y => Expr::Y,
        }
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_const(&self, v: i64) -> bool {
        self.as_const().is_some_and(|c| *c == v)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p + q),
            (Some(p), _) if p.is_zero() => b,
            (_, Some(q)) if q.is_zero() => a,
            _ => match b {
                Expr::Neg(inner) => Expr::Sub(Box::new(a), inner),
                b => Expr::Add(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p - q),
            (Some(p), _) if p.is_zero() => Expr::neg(b),
            (_, Some(q)) if q.is_zero() => a,
            _ => match b {
                Expr::Neg(inner) => Expr::Add(Box::new(a), inner),
                b => Expr::Sub(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p * q),
            (Some(p), _) | (_, Some(p)) if p.is_zero() => Expr::Const(Rational::zero()),
            (Some(p), _) if *p == 1 => b,
            (_, Some(q)) if *q == 1 => a,
            (Some(p), _) if *p == -1 => Expr::neg(b),
            (_, Some(q)) if *q == -1 => Expr::neg(a),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) if !q.is_zero() => Expr::Const(p / q),
            (_, Some(q)) if *q == 1 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr, exp: Rational) -> Expr {
        if exp == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if exp.is_integer() && (exp.is_positive() || !c.is_zero()) {
                if let Ok(e) = i64::try_from(exp.numer().clone()) {
                    return Expr::Const(c.pow(e).expect("nonzero base"));
                }
            }
        }
        Expr::Pow(Box::new(base), exp)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Symbolic partial derivative.
    pub fn differentiate(&self, v: Var) -> Expr {
        match self {
            Expr::X => Expr::Const(Rational::from((v == Var::X) as i64)),
            Expr::Y => Expr::Const(Rational::from((v == Var::Y) as i64)),
            Expr::Const(_) => Expr::Const(Rational::zero()),
            Expr::Add(a, b) => Expr::add(a.differentiate(v), b.differentiate(v)),
            Expr::Sub(a, b) => Expr::sub(a.differentiate(v), b.differentiate(v)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(v), (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate(v)),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate(v);
                let db = b.differentiate(v);
                if db.is_const(0) {
                    Expr::div(da, (**b).clone())
                } else {
                    Expr::div(
                        Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                        Expr::pow((**b).clone(), Rational::from(2)),
                    )
                }
            }
            Expr::Pow(base, e) => {
                let outer = if *e == 2 {
                    Expr::mul(Expr::Const(e.clone()), (**base).clone())
                } else {
                    Expr::mul(Expr::Const(e.clone()), Expr::pow((**base).clone(), e - Rational::one()))
                };
                Expr::mul(outer, base.differentiate(v))
            }
            Expr::Neg(a) => Expr::neg(a.differentiate(v)),
        }
    }

    /// `f` with one variable replaced by its negation.
    pub fn negate_var(&self, v: Var) -> Expr {
        let rec = |e: &Expr| e.negate_var(v);
        match self {
            Expr::X if v == Var::X => Expr::neg(Expr::X),
            Expr::Y if v == Var::Y => Expr::neg(Expr::Y),
            Expr::X | Expr::Y | Expr::Const(_) => self.clone(),
            Expr::Add(a, b) => Expr::add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::mul(rec(a), rec(b)),
            Expr::Div(a, b) => Expr::div(rec(a), rec(b)),
            Expr::Pow(a, e) => Expr::pow(rec(a), e.clone()),
            Expr::Neg(a) => Expr::neg(rec(a)),
        }
    }

    /// Sound enclosure of `{f(x, y) : x ∈ rx, y ∈ ry}` with the default
    /// rounding grid for irrational powers.
    pub fn eval_interval(&self, rx: &RatInterval, ry: &RatInterval) -> Result<RatInterval, ExprError> {
        self.eval_interval_with(rx, ry, &default_denom_bound())
    }

    pub fn eval_interval_with(
        &self,
        rx: &RatInterval,
        ry: &RatInterval,
        denom_bound: &BigInt,
    ) -> Result<RatInterval, ExprError> {
        let ev = |e: &Expr| e.eval_interval_with(rx, ry, denom_bound);
        Ok(match self {
            Expr::X => rx.clone(),
            Expr::Y => ry.clone(),
            Expr::Const(c) => RatInterval::point(c.clone()),
            Expr::Add(a, b) => ev(a)?.add(&ev(b)?),
            Expr::Sub(a, b) => ev(a)?.sub(&ev(b)?),
            Expr::Mul(a, b) => ev(a)?.mul(&ev(b)?),
            Expr::Div(a, b) => ev(a)?.div(&ev(b)?)?,
            Expr::Pow(a, e) => ev(a)?.pow_rational(e, denom_bound)?,
            Expr::Neg(a) => ev(a)?.neg(),
        })
    }

    /// Enclosure of `f(x, y)` at a point; a point interval unless a
    /// fractional power makes the value irrational.
    pub fn eval_point(&self, x: &Rational, y: &Rational) -> Result<RatInterval, ExprError> {
        self.eval_interval(&RatInterval::point(x.clone()), &RatInterval::point(y.clone()))
    }

    /// `f(x, y)` in floating point.
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::X => x,
            Expr::Y => y,
            Expr::Const(c) => c.to_f64(),
            Expr::Add(a, b) => a.eval_f64(x, y) + b.eval_f64(x, y),
            Expr::Sub(a, b) => a.eval_f64(x, y) - b.eval_f64(x, y),
            Expr::Mul(a, b) => a.eval_f64(x, y) * b.eval_f64(x, y),
            Expr::Div(a, b) => a.eval_f64(x, y) / b.eval_f64(x, y),
            Expr::Pow(a, e) => {
                let base = a.eval_f64(x, y);
                if e.is_integer() {
                    base.powi(e.to_f64() as i32)
                } else {
                    base.powf(e.to_f64())
                }
            }
            Expr::Neg(a) => -a.eval_f64(x, y),
        }
    }

    pub fn grad_enclosure(&self, rx: &RatInterval, ry: &RatInterval) -> Result<GradEnclosure, ExprError> {
        let dx = self.differentiate(Var::X).eval_interval(rx, ry)?;
        let dy = self.differentiate(Var::Y).eval_interval(rx, ry)?;
        Ok(GradEnclosure { dx, dy, rect: (rx.clone(), ry.clone()) })
    }

    /// True when the expression is a polynomial of total degree at most one.
    pub fn is_affine(&self) -> bool {
        let second = [
            self.differentiate(Var::X).differentiate(Var::X),
            self.differentiate(Var::X).differentiate(Var::Y),
            self.differentiate(Var::Y).differentiate(Var::Y),
        ];
        second.iter().all(|e| e.is_const(0))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            _ => 3,
        }
    }

    fn is_atom(&self) -> bool {
        match self {
            Expr::X | Expr::Y => true,
            Expr::Const(c) => c.is_integer() && !c.is_negative(),
            _ => false,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.write_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::X => write!(f, "x"),
            Expr::Y => write!(f, "y"),
            Expr::Const(c) if c.is_integer() && !c.is_negative() => write!(f, "{c}"),
            Expr::Const(c) => write!(f, "({c})"),
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "*")?;
                b.write_prec(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "/")?;
                b.write_prec(f, 3)
            }
            Expr::Pow(base, e) => {
                if base.is_atom() {
                    base.write_prec(f, 3)?;
                } else {
                    write!(f, "(")?;
                    base.write_prec(f, 0)?;
                    write!(f, ")")?;
                }
                if e.is_integer() && e.is_positive() {
                    write!(f, "^{e}")
                } else {
                    write!(f, "^({e})")
                }
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                match **a {
                    Expr::Pow(..) | Expr::Neg(..) => a.write_prec(f, 3),
                    _ if a.is_atom() => a.write_prec(f, 3),
                    _ => {
                        write!(f, "(")?;
                        a.write_prec(f, 0)?;
                        write!(f, ")")
                    }
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat(b'-') {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::mul(acc, self.factor()?);
            } else if self.eat(b'/') {
                acc = Expr::div(acc, self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let at = self.pos;
            let e = self.exponent()?;
            if e.is_zero() {
                return Err(ExprError::ZeroExponent { pos: at });
            }
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Expr::Y)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::neg(self.factor()?))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(_) => Err(self.error("expected x, y, a number, '(' or '-'")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Rational, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| ExprError::Syntax { pos: start, msg: format!("bad number {text:?}") })
    }

    fn signed_number(&mut self) -> Result<Rational, ExprError> {
        let negative = self.eat(b'-');
        let n = self.number()?;
        Ok(if negative { -n } else { n })
    }

    fn exponent(&mut self) -> Result<Rational, ExprError> {
        if self.eat(b'(') {
            let mut e = self.signed_number()?;
            if self.eat(b'/') {
                let at = self.pos;
                let d = self.number()?;
                e = e.checked_div(&d).map_err(|_| ExprError::Syntax { pos: at, msg: "zero denominator".into() })?;
            }
            self.expect(b')')?;
            Ok(e)
        } else {
            self.signed_number()
        }
    }
}
