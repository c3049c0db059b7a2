//! Closed-form univariate functions with exact derivatives.
//!
//! Warping functions, deformation functions `α(t)`, `β(t)` and user-supplied
//! profiles are all [`Expr`] trees. Evaluating on a [`Jet`](crate::jet::Jet)
//! yields exact first and second derivatives, so identity checks stay at
//! round-off level rather than finite-difference level.
//!
//! Expressions parse from and print to a small infix syntax:
//! `2 + sin(t)`, `1/(t + 0.5)`, `t^2 - 3*t`, `exp(-t/2)*cos(t)`. The single
//! free variable may be written `t`, `r` or `x`; `pi` and `e` are constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::jet::{Jet1, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    Powf(Box<Expr>, f64),
    Func(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    /// Polynomial `Σ c_k t^k`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let mut acc: Option<Expr> = None;
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = match k {
                0 => Expr::Const(c),
                1 => Expr::Const(c) * Expr::Var,
                _ => Expr::Const(c) * Expr::Powi(Box::new(Expr::Var), k as i32),
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or(Expr::Const(0.0))
    }

    /// `c / (t + shift)`.
    pub fn shifted_reciprocal(c: f64, shift: f64) -> Self {
        Expr::Const(c) / (Expr::Var + Expr::Const(shift))
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        Expr::Func(f, Box::new(arg))
    }

    pub fn eval<T: Real>(&self, t: T) -> T {
        match self {
            Expr::Const(c) => T::from_f64(*c),
            Expr::Var => t,
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Neg(a) => -a.eval(t),
            Expr::Powi(a, k) => a.eval(t).powi(*k),
            Expr::Powf(a, p) => a.eval(t).powf(*p),
            Expr::Func(f, a) => f.apply(a.eval(t)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    /// Value, first and second derivative at `t`.
    pub fn jet(&self, t: f64) -> Jet1 {
        self.eval(Jet1::var(t))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Powf(a, _) | Expr::Func(_, a) => {
                a.is_constant()
            }
        }
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "({c:?})"),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "t"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Powi(a, k) => write!(f, "({a}^{k})"),
            Expr::Powf(a, p) => write!(f, "({a}^{p:?})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("expected {expected} at offset {pos}")]
    Expected { expected: &'static str, pos: usize },
    #[error("invalid number {0:?}")]
    BadNumber(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                let save = i;
                i += 1;
                if i < bytes.len() && (bytes[i] == '+' || bytes[i] == '-') {
                    i += 1;
                }
                if i < bytes.len() && bytes[i].is_ascii_digit() {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = bytes[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| ParseError::BadNumber(text.clone()))?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(bytes[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::UnexpectedChar { ch: c, pos: i });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(usize::MAX, |(_, p)| *p)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = lhs + self.term()?;
            } else if self.eat_op('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat_op('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            Ok(-self.unary()?)
        } else if self.eat_op('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    // `^` binds tighter than unary minus and is right-associative.
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let exponent = self.unary()?;
        if !exponent.is_constant() {
            // a^b = exp(b ln a)
            return Ok(Expr::func(Func::Exp, exponent * Expr::func(Func::Ln, base)));
        }
        let p = exponent.value(0.0);
        if p.fract() == 0.0 && p.abs() <= f64::from(i32::MAX) {
            Ok(Expr::Powi(Box::new(base), p as i32))
        } else {
            Ok(Expr::Powf(Box::new(base), p))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.offset();
        let tok = self.peek().cloned().ok_or(ParseError::UnexpectedEnd)?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(ParseError::Expected {
                        expected: "')'",
                        pos: self.offset(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" | "r" | "x" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "e" => Ok(Expr::Const(std::f64::consts::E)),
                other => {
                    let f = Func::from_name(other)
                        .ok_or_else(|| ParseError::UnknownIdent(other.to_string()))?;
                    if !self.eat_op('(') {
                        return Err(ParseError::Expected {
                            expected: "'('",
                            pos: self.offset(),
                        });
                    }
                    let arg = self.expr()?;
                    if !self.eat_op(')') {
                        return Err(ParseError::Expected {
                            expected: "')'",
                            pos: self.offset(),
                        });
                    }
                    Ok(Expr::func(f, arg))
                }
            },
            Tok::Op(c) => Err(ParseError::UnexpectedChar { ch: c, pos }),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            toks: tokenize(s)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ParseError::Expected {
                expected: "end of expression",
                pos: p.offset(),
            });
        }
        Ok(e)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Smooth monotone transition from 0 (at `x ≤ lo`) to 1 (at `x ≥ hi`), built
/// from `exp(-1/t)` so that it is `C^∞` with all derivatives vanishing at the
/// ends of the transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothStep {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "smooth step needs lo < hi");
        Self { lo, hi }
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        let xv = x.value();
        if xv <= self.lo {
            return T::from_f64(0.0);
        }
        if xv >= self.hi {
            return T::from_f64(1.0);
        }
        let tau = (x - self.lo) / (self.hi - self.lo);
        let left = (T::from_f64(-1.0) / tau).exp();
        let right = (T::from_f64(-1.0) / (T::from_f64(1.0) - tau)).exp();
        left / (left + right)
    }
}

/// Plateau cutoff: 0 outside `(rise.lo, fall.hi)`, 1 on `[rise.hi, fall.lo]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub rise: SmoothStep,
    pub fall: SmoothStep,
}

impl Plateau {
    pub fn new(rise: SmoothStep, fall: SmoothStep) -> Self {
        assert!(rise.hi <= fall.lo, "plateau transitions overlap");
        Self { rise, fall }
    }

    /// Identically zero.
    pub fn zero() -> Self {
        Self {
            rise: SmoothStep::new(f64::MAX / 4.0, f64::MAX / 2.0),
            fall: SmoothStep::new(f64::MAX / 2.0, f64::MAX),
        }
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        self.rise.eval(x) * (T::from_f64(1.0) - self.fall.eval(x))
    }
}
