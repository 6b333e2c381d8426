use std::fmt;

use super::dual::Scalar;
use super::EvalErrorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sinh,
    Cosh,
    Asinh,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sinh, Func::Cosh, Func::Asinh, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Asinh => "asinh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply<S: Scalar>(self, v: S) -> Result<S, EvalErrorKind> {
        Ok(match self {
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Asinh => v.asinh(),
            Func::Sqrt => {
                if v.value() < 0.0 {
                    return Err(EvalErrorKind::Domain {
                        func: "sqrt",
                        arg: v.value(),
                    });
                }
                v.sqrt()
            }
            Func::Abs => v.abs(),
        })
    }
}

/// Expression tree over the variables `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval<S: Scalar>(&self, x: S, y: S) -> Result<S, EvalErrorKind> {
        Ok(match self {
            Expr::Const(c) => S::constant(*c),
            Expr::X => x,
            Expr::Y => y,
            Expr::Add(a, b) => a.eval(x, y)? + b.eval(x, y)?,
            Expr::Sub(a, b) => a.eval(x, y)? - b.eval(x, y)?,
            Expr::Mul(a, b) => a.eval(x, y)? * b.eval(x, y)?,
            Expr::Div(a, b) => {
                let num = a.eval(x, y)?;
                let den = b.eval(x, y)?;
                if den.value() == 0.0 {
                    return Err(EvalErrorKind::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, n) => a.eval(x, y)?.powi(*n),
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Call(f, a) => f.apply(a.eval(x, y)?)?,
        })
    }

    /// Replace `x` and `y` by the given expressions.
    pub fn substitute(&self, x: &Expr, y: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(x, y));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::X => x.clone(),
            Expr::Y => y.clone(),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, n) => Expr::Pow(sub(a), *n),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::X | Expr::Y => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Call(_, a) => 1 + a.size(),
        }
    }
}

// Fully parenthesized so that printing and re-parsing rebuilds an expression
// with bitwise-identical evaluation.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-({:?}))", c.abs()),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Neg(a) => write!(f, "(-({a}))"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
