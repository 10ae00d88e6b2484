//! Coefficient expressions in `x` and `y`, evaluated together with their partial derivatives.
//!
//! Derivatives are propagated by forward jet arithmetic ([`Jet2`]) rather than symbolic
//! differentiation. See [`parse`](self::parse) for the accepted grammar.

mod jet;
mod parse;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use jet::{Jet1, Jet2, JetNum, Line3};

/// Distance from a pole of `tan` below which evaluation is rejected.
pub const TAN_POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("'{name}' takes {expected} argument(s), found {found} (byte {offset})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("exponent at byte {offset} depends on x or y")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::NonConstantExponent { offset } => Some(*offset),
        }
    }
}

/// Evaluation left the domain of some sub-expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error: {0}")]
pub struct DomainError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Abstract syntax tree of a coefficient expression. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    /// Builds a binary node, folding literal arithmetic.
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        if let (Expr::Num(a), Expr::Num(b)) = (&lhs, &rhs) {
            let folded = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(*b),
            };
            if folded.is_finite() && !(op == BinOp::Div && *b == 0.0) {
                return Expr::Num(folded);
            }
        }
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn negate(inner: Expr) -> Expr {
        match inner {
            Expr::Num(v) => Expr::Num(-v),
            e => Expr::Neg(Box::new(e)),
        }
    }

    /// True when the expression does not mention `x` or `y`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        self.eval_with(x, y)
    }

    /// Value and partials up to order two at `(x, y)`.
    pub fn eval_jet2(&self, x: f64, y: f64) -> Result<Jet2, DomainError> {
        self.eval_with(Jet2::var_x(x), Jet2::var_y(y))
    }

    /// Value and the first three derivatives along the vertical line through `(x, y)`.
    pub fn eval_line_y(&self, x: f64, y: f64) -> Result<Line3, DomainError> {
        self.eval_with(Line3::constant(x), Line3::variable(y))
    }

    /// Evaluates with an arbitrary jet type standing in for `x` and `y`.
    pub fn eval_with<T: JetNum>(&self, x: T, y: T) -> Result<T, DomainError> {
        let out = match self {
            Expr::Num(v) => T::constant(*v),
            Expr::Pi => T::constant(PI),
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(e) => -e.eval_with(x, y)?,
            Expr::Bin(op, a, b) => {
                let lhs = a.eval_with(x, y)?;
                match op {
                    BinOp::Add => lhs + b.eval_with(x, y)?,
                    BinOp::Sub => lhs - b.eval_with(x, y)?,
                    BinOp::Mul => lhs * b.eval_with(x, y)?,
                    BinOp::Div => {
                        let rhs = b.eval_with(x, y)?;
                        if rhs.value() == 0.0 {
                            return Err(DomainError("division by zero".into()));
                        }
                        lhs / rhs
                    }
                    BinOp::Pow => {
                        let n = b.eval(0.0, 0.0)?;
                        power(lhs, n)?
                    }
                }
            }
            Expr::Call(f, a) => apply(*f, a.eval_with(x, y)?)?,
        };
        if !out.value().is_finite() {
            return Err(DomainError(format!("non-finite value in '{self}'")));
        }
        Ok(out)
    }
}

fn power<T: JetNum>(base: T, n: f64) -> Result<T, DomainError> {
    let u = base.value();
    let integer = n.fract() == 0.0;
    if n == 0.0 {
        return Ok(T::constant(1.0));
    }
    if integer {
        if u == 0.0 && n < 0.0 {
            return Err(DomainError("division by zero in negative power".into()));
        }
    } else if u < 0.0 || (u == 0.0 && !base.is_flat()) {
        return Err(DomainError(format!(
            "non-integer power {n} of non-positive base {u}"
        )));
    }
    Ok(base.compose(jet::power_derivatives(u, n)))
}

fn apply<T: JetNum>(f: Func, arg: T) -> Result<T, DomainError> {
    let u = arg.value();
    let g = match f {
        Func::Sin => {
            let (s, c) = u.sin_cos();
            [s, c, -s, -c]
        }
        Func::Cos => {
            let (s, c) = u.sin_cos();
            [c, -s, -c, s]
        }
        Func::Tan => {
            let k = ((u - FRAC_PI_2) / PI).round();
            if (u - (FRAC_PI_2 + k * PI)).abs() < TAN_POLE_TOLERANCE {
                return Err(DomainError(format!("tan pole at {u}")));
            }
            let t = u.tan();
            let s = 1.0 + t * t;
            [t, s, 2.0 * t * s, 2.0 * s * (1.0 + 3.0 * t * t)]
        }
        Func::Exp => {
            let e = u.exp();
            [e; 4]
        }
        Func::Log => {
            if u <= 0.0 {
                return Err(DomainError(format!("log of non-positive value {u}")));
            }
            let r = u.recip();
            [u.ln(), r, -r * r, 2.0 * r * r * r]
        }
        Func::Sqrt => {
            if u < 0.0 {
                return Err(DomainError(format!("sqrt of negative value {u}")));
            }
            if u == 0.0 {
                if arg.is_flat() {
                    return Ok(T::constant(0.0));
                }
                return Err(DomainError("sqrt is not differentiable at 0".into()));
            }
            let s = u.sqrt();
            [s, 0.5 / s, -0.25 / (u * s), 0.375 / (u * u * s)]
        }
    };
    Ok(arg.compose(g))
}

/// Binding strength used when printing.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_operand(f, e, 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                write_operand(f, a, lmin)?;
                f.write_str(sym)?;
                write_operand(f, b, rmin)
            }
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Expr::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses an expression in `x` and `y`.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    Expr::parse(text)
}

/// Value and partial derivatives up to order two of `e` at `(x, y)`.
pub fn eval_jet2(e: &Expr, x: f64, y: f64) -> Result<Jet2, DomainError> {
    e.eval_jet2(x, y)
}
