use super::jet::{Dual1, Dual2, Jet2, Scalar, MAX_DIM};
use super::{Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} is undefined at `{subexpr}` (argument {arg})")]
    Domain { op: &'static str, subexpr: String, arg: f64 },
    #[error("`{subexpr}` evaluated to a non-finite value")]
    NonFinite { subexpr: String },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("derivatives are limited to {MAX_DIM} coordinates, got {0}")]
    TooManyCoordinates(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, i32),
    Call(Func, u32),
}

/// A list of expressions flattened into one post-order instruction list.
///
/// Evaluation is generic over [`Scalar`], so the same tape yields values,
/// gradients or full second-order jets.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    names: Vec<String>,
}

impl Tape {
    /// Compiles `exprs` over the chart coordinates `names`.
    pub fn compile<S: AsRef<str>>(exprs: &[Expr], names: &[S]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            outputs: Vec::with_capacity(exprs.len()),
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
        };
        for e in exprs {
            let slot = tape.push(e);
            tape.outputs.push(slot);
        }
        tape
    }

    fn push(&mut self, e: &Expr) -> u32 {
        let op = match e {
            Expr::Const(c) => Op::Const(*c),
            Expr::Var(i) => Op::Var(*i),
            Expr::Neg(a) => Op::Neg(self.push(a)),
            Expr::Add(a, b) => Op::Add(self.push(a), self.push(b)),
            Expr::Sub(a, b) => Op::Sub(self.push(a), self.push(b)),
            Expr::Mul(a, b) => Op::Mul(self.push(a), self.push(b)),
            Expr::Div(a, b) => Op::Div(self.push(a), self.push(b)),
            Expr::Pow(a, k) => Op::Pow(self.push(a), *k),
            Expr::Call(f, a) => Op::Call(*f, self.push(a)),
        };
        self.ops.push(op);
        (self.ops.len() - 1) as u32
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.names.len()
    }

    /// Rebuilds the subexpression rooted at tape slot `k`.
    fn subexpr(&self, k: u32) -> Expr {
        let b = |i: u32| Box::new(self.subexpr(i));
        match self.ops[k as usize] {
            Op::Const(c) => Expr::Const(c),
            Op::Var(i) => Expr::Var(i),
            Op::Neg(a) => Expr::Neg(b(a)),
            Op::Add(x, y) => Expr::Add(b(x), b(y)),
            Op::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Op::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Op::Div(x, y) => Expr::Div(b(x), b(y)),
            Op::Pow(x, p) => Expr::Pow(b(x), p),
            Op::Call(f, x) => Expr::Call(f, b(x)),
        }
    }

    fn label(&self, k: u32) -> String {
        self.subexpr(k).display(&self.names).to_string()
    }

    fn domain(&self, op: &'static str, k: u32, arg: f64) -> EvalError {
        EvalError::Domain { op, subexpr: self.label(k), arg }
    }

    /// Evaluates every output at `inputs`.
    pub fn eval<T: Scalar>(&self, inputs: &[T]) -> Result<Vec<T>, EvalError> {
        if inputs.len() != self.names.len() {
            return Err(EvalError::Arity { expected: self.names.len(), got: inputs.len() });
        }
        let mut slots: Vec<T> = Vec::with_capacity(self.ops.len());
        for (k, op) in self.ops.iter().enumerate() {
            let k = k as u32;
            let s = |i: u32| &slots[i as usize];
            let r = match *op {
                Op::Const(c) => T::constant(c),
                Op::Var(i) => inputs[i].clone(),
                Op::Neg(a) => s(a).neg(),
                Op::Add(a, b) => s(a).add(s(b)),
                Op::Sub(a, b) => s(a).sub(s(b)),
                Op::Mul(a, b) => s(a).mul(s(b)),
                Op::Div(a, b) => {
                    let d = s(b).value();
                    if d == 0.0 {
                        return Err(self.domain("division", b, d));
                    }
                    s(a).mul(&s(b).chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d)))
                }
                Op::Pow(a, p) => {
                    let x = s(a).value();
                    if p < 0 && x == 0.0 {
                        return Err(self.domain("negative power", a, x));
                    }
                    let pf = p as f64;
                    let (f1, f2) = if T::ORDER == 0 {
                        (0.0, 0.0)
                    } else if x == 0.0 {
                        // x^p with p >= 0 has well-defined derivatives at 0.
                        (
                            if p == 1 { 1.0 } else { 0.0 },
                            if p == 2 { 2.0 } else { 0.0 },
                        )
                    } else {
                        (pf * x.powi(p - 1), pf * (pf - 1.0) * x.powi(p - 2))
                    };
                    s(a).chain(x.powi(p), f1, f2)
                }
                Op::Call(f, a) => {
                    let x = s(a).value();
                    let arg = s(a);
                    match f {
                        Func::Exp => {
                            let e = x.exp();
                            arg.chain(e, e, e)
                        }
                        Func::Log => {
                            if x <= 0.0 {
                                return Err(self.domain("log", a, x));
                            }
                            arg.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
                        }
                        Func::Sin => {
                            let (sn, cs) = x.sin_cos();
                            arg.chain(sn, cs, -sn)
                        }
                        Func::Cos => {
                            let (sn, cs) = x.sin_cos();
                            arg.chain(cs, -sn, -cs)
                        }
                        Func::Sinh => arg.chain(x.sinh(), x.cosh(), x.sinh()),
                        Func::Cosh => arg.chain(x.cosh(), x.sinh(), x.cosh()),
                        Func::Tanh => {
                            let t = x.tanh();
                            let d = 1.0 - t * t;
                            arg.chain(t, d, -2.0 * t * d)
                        }
                        Func::Sqrt => {
                            if x < 0.0 || (x == 0.0 && T::ORDER > 0) {
                                return Err(self.domain("sqrt", a, x));
                            }
                            let r = x.sqrt();
                            if T::ORDER == 0 {
                                arg.chain(r, 0.0, 0.0)
                            } else {
                                arg.chain(r, 0.5 / r, -0.25 / (r * x))
                            }
                        }
                    }
                }
            };
            if !r.value().is_finite() {
                return Err(EvalError::NonFinite { subexpr: self.label(k) });
            }
            slots.push(r);
        }
        Ok(self.outputs.iter().map(|&o| slots[o as usize].clone()).collect())
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.eval(x)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.names.len() {
            return Err(EvalError::Arity { expected: self.names.len(), got: x.len() });
        }
        if x.len() > MAX_DIM {
            return Err(EvalError::TooManyCoordinates(x.len()));
        }
        Ok(())
    }

    /// Values and gradients.
    pub fn eval_dual1(&self, x: &[f64]) -> Result<Vec<Dual1>, EvalError> {
        self.check_dim(x)?;
        let n = x.len();
        let seeds: Vec<Dual1> = (0..n).map(|i| Dual1::variable(x[i], i, n)).collect();
        self.eval(&seeds)
    }

    /// Values, gradients and Hessians.
    pub fn eval_dual2(&self, x: &[f64]) -> Result<Vec<Dual2>, EvalError> {
        self.check_dim(x)?;
        let n = x.len();
        let seeds: Vec<Dual2> = (0..n).map(|i| Dual2::variable(x[i], i, n)).collect();
        self.eval(&seeds)
    }

    pub fn eval_jet2(&self, x: &[f64]) -> Result<Vec<Jet2>, EvalError> {
        let n = x.len();
        Ok(self.eval_dual2(x)?.iter().map(|d| Jet2::from_dual(d, n)).collect())
    }
}
