//! Component expressions for metrics, immersions and vector fields.
//!
//! An [`Expr`] is a plain syntax tree over chart coordinates. Coordinates are
//! referenced by index into the owning chart's coordinate list, so a tree can
//! only mention symbols the chart declares. Evaluation goes through a compiled
//! [`Tape`], which can be run on `f64` or on the forward-mode jets in [`jet`].
//!
//! Grammar (documented in the README as well):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' ['-'] integer)?
//! atom    := number | symbol | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sin | cos | sinh | cosh | tanh | sqrt
//! ```
//!
//! `pi` is a predefined constant unless the chart declares a coordinate with
//! that name. Juxtaposition (`2x`) is rejected.

mod jet;
mod parse;
mod tape;

pub use jet::{Dual1, Dual2, Jet2, Scalar, MAX_DIM};
pub use parse::{parse, ParseError};
pub use tape::{EvalError, Tape};

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Transcendental functions available in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. `Var(i)` is the i-th coordinate of the owning chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn c(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn call(self, f: Func) -> Expr {
        Expr::Call(f, Box::new(self))
    }

    pub fn exp(self) -> Expr {
        self.call(Func::Exp)
    }
    pub fn log(self) -> Expr {
        self.call(Func::Log)
    }
    pub fn sin(self) -> Expr {
        self.call(Func::Sin)
    }
    pub fn cos(self) -> Expr {
        self.call(Func::Cos)
    }
    pub fn sinh(self) -> Expr {
        self.call(Func::Sinh)
    }
    pub fn cosh(self) -> Expr {
        self.call(Func::Cosh)
    }
    pub fn tanh(self) -> Expr {
        self.call(Func::Tanh)
    }
    pub fn sqrt(self) -> Expr {
        self.call(Func::Sqrt)
    }

    /// Integer power. Exponents 0 and 1 are folded when building.
    pub fn powi(self, k: i32) -> Expr {
        match k {
            0 => Expr::one(),
            1 => self,
            _ => Expr::Pow(Box::new(self), k),
        }
    }

    /// Coordinate indices referenced anywhere in the tree.
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    pub fn depends_on(&self, index: usize) -> bool {
        let mut hit = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Var(i) if *i == index) {
                hit = true;
            }
        });
        hit
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replaces every `Var(i)` by `f(i)`. Used to move expressions between
    /// charts (product charts, fixed base points, pullbacks).
    pub fn substitute(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => f(*i),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.substitute(f)), *k),
            Expr::Call(g, a) => Expr::Call(*g, Box::new(a.substitute(f))),
        }
    }

    /// Shifts every coordinate index by `offset`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.substitute(&|i| Expr::Var(i + offset))
    }

    /// Pretty-printer bound to a coordinate name list.
    pub fn display<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> ExprDisplay<'a, S> {
        ExprDisplay { expr: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

// Builder arithmetic folds trivial constants so generated model metrics stay
// readable. The parser constructs nodes directly and never goes through here.
impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(a), _) if a == 0.0 => rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Add(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (Some(a), _) if a == 0.0 => -rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Sub(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => self,
            (Some(a), _) if a == -1.0 => -rhs,
            (_, Some(b)) if b == -1.0 => -self,
            _ => Expr::Mul(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match rhs.as_const() {
            Some(b) if b == 1.0 => self,
            _ if self.is_zero() => Expr::zero(),
            _ => Expr::Div(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Const(self) * rhs
    }
}

impl Add<Expr> for f64 {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Const(self) + rhs
    }
}

pub struct ExprDisplay<'a, S> {
    expr: &'a Expr,
    names: &'a [S],
}

impl<S: AsRef<str>> ExprDisplay<'_, S> {
    fn child(&self, e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = ExprDisplay { expr: e, names: self.names };
        if e.precedence() < min_prec {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl<S: AsRef<str>> fmt::Display for ExprDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{}", name.as_ref()),
                None => write!(f, "#{i}"),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                // A bare positive literal would fold into a negative constant
                // on re-parse, so keep it parenthesized.
                if matches!(**a, Expr::Const(c) if !c.is_sign_negative()) {
                    let inner = ExprDisplay { expr: a, names: self.names };
                    write!(f, "({inner})")
                } else {
                    self.child(a, 3, f)
                }
            }
            Expr::Add(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " + ")?;
                self.child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " - ")?;
                self.child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.child(a, 2, f)?;
                write!(f, " * ")?;
                self.child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.child(a, 2, f)?;
                write!(f, " / ")?;
                self.child(b, 3, f)
            }
            Expr::Pow(a, k) => {
                self.child(a, 5, f)?;
                write!(f, "^{k}")
            }
            Expr::Call(g, a) => {
                let inner = ExprDisplay { expr: a, names: self.names };
                write!(f, "{}({inner})", g.name())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_folds_trivial_constants() {
        let x = Expr::var(0);
        assert_eq!(Expr::zero() + x.clone(), x);
        assert_eq!(Expr::one() * x.clone(), x);
        assert!((Expr::zero() * x.clone()).is_zero());
        assert_eq!(-(-x.clone()), x);
        assert_eq!(x.clone().powi(1), x);
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let names = ["t", "x"];
        let e = (Expr::var(0) + Expr::var(1)) * Expr::var(0);
        assert_eq!(e.display(&names).to_string(), "(t + x) * t");
        let e = Expr::Sub(
            Box::new(Expr::var(0)),
            Box::new(Expr::Sub(Box::new(Expr::var(1)), Box::new(Expr::c(2.0)))),
        );
        assert_eq!(e.display(&names).to_string(), "t - (x - 2)");
        let e = Expr::Pow(Box::new(Expr::c(-1.0)), 2);
        assert_eq!(e.display(&names).to_string(), "(-1)^2");
    }

    #[test]
    fn substitute_and_dependencies() {
        let e = (Expr::var(0) * Expr::c(2.0)).exp() + Expr::var(2);
        assert!(e.depends_on(0));
        assert!(!e.depends_on(1));
        let fixed = e.substitute(&|i| if i == 0 { Expr::c(0.5) } else { Expr::var(i - 1) });
        assert_eq!(fixed.vars().into_iter().collect::<Vec<_>>(), vec![1]);
    }
}
