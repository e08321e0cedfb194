//! Scalar expression language used by problem files.
//!
//! Supports literals, named variables, `+ - * / ^` (with `^` binding
//! tighter than unary minus and associating right), the functions `exp`,
//! `ln`, `sin`, `cos`, `abs`, `sqrt`, two-argument `min`/`max`, and a
//! conditional `ite(cond, a, b)` whose condition is a single comparison
//! (`< <= > >= ==`) between subexpressions. There is no implicit
//! multiplication. Evaluation is strict about domains: division by zero,
//! `ln` of a non-positive value and `sqrt` of a negative value are errors
//! rather than NaN, and any non-finite intermediate is also an error.

mod parse;

pub use parse::{parse, ParseError};

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// `ite(lhs op rhs, then, else)`
    Ite {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("ln of non-positive value {0}")]
    LnNonPositive(f64),
    #[error("sqrt of negative value {0}")]
    SqrtNegative(f64),
    #[error("non-finite result in `{0}`")]
    NonFinite(&'static str),
}

/// Variable bindings. Linear scan over a small vector: problem files bind a
/// handful of names and grid loops rebind values in place via [`Env::set`].
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: Vec<(String, f64)>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        for (n, v) in self.vars.iter_mut() {
            if n == name {
                *v = value;
                return;
            }
        }
        self.vars.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

fn finite(tag: &'static str, v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(tag))
    }
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => env
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
            Expr::Neg(e) => Ok(-e.eval(env)?),
            Expr::Bin(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                match op {
                    BinOp::Add => finite("+", x + y),
                    BinOp::Sub => finite("-", x - y),
                    BinOp::Mul => finite("*", x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            finite("/", x / y)
                        }
                    }
                    BinOp::Pow => finite("^", x.powf(y)),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(env)?;
                match f {
                    Func::Exp => finite("exp", x.exp()),
                    Func::Ln => {
                        if x <= 0.0 {
                            Err(EvalError::LnNonPositive(x))
                        } else {
                            finite("ln", x.ln())
                        }
                    }
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Abs => Ok(x.abs()),
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(EvalError::SqrtNegative(x))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Min => Ok(x.min(args[1].eval(env)?)),
                    Func::Max => Ok(x.max(args[1].eval(env)?)),
                }
            }
            Expr::Ite {
                op,
                lhs,
                rhs,
                then,
                otherwise,
            } => {
                let l = lhs.eval(env)?;
                let r = rhs.eval(env)?;
                let cond = match op {
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Gt => l > r,
                    CmpOp::Ge => l >= r,
                    CmpOp::Eq => l == r,
                };
                if cond {
                    then.eval(env)
                } else {
                    otherwise.eval(env)
                }
            }
        }
    }

    /// Collects free variable names in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                if !out.iter().any(|v| v == n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            Expr::Ite {
                lhs,
                rhs,
                then,
                otherwise,
                ..
            } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
                then.collect_vars(out);
                otherwise.collect_vars(out);
            }
        }
    }
}

// The printer parenthesizes every compound subterm, so reparsing its output
// always reproduces the same tree regardless of precedence.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var(n) => write!(f, "{}", n),
            Expr::Neg(e) => write!(f, "(-{})", e),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({}{}{})", a, sym, b)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Expr::Ite {
                op,
                lhs,
                rhs,
                then,
                otherwise,
            } => write!(
                f,
                "ite({}{}{},{},{})",
                lhs,
                op.symbol(),
                rhs,
                then,
                otherwise
            ),
        }
    }
}
