//! Expression trees over named coordinates.
//!
//! Used for user-supplied sections and Hamiltonians. Evaluation is generic
//! over [`Scalar`]; the symbolic derivative [`Expr::diff`] exists as an
//! independent check on the dual-number derivatives.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;
use crate::smooth::SmoothMap;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
}

pub fn var(i: usize) -> Expr {
    Expr::Var(i)
}

pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}

impl Expr {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Expr::Const(v) => S::from_f64(*v),
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Powi(a, n) => a.eval(x).powi(*n),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
        }
    }

    /// One more than the largest variable index used.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Neg(a)
            | Expr::Powi(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::Sqrt(a) => a.arity(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    /// Symbolic partial derivative with light constant folding.
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => c(0.0),
            Expr::Var(j) => c(if *j == i { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => a.diff(i) + b.diff(i),
            Expr::Sub(a, b) => a.diff(i) - b.diff(i),
            Expr::Mul(a, b) => a.diff(i) * (**b).clone() + (**a).clone() * b.diff(i),
            Expr::Div(a, b) => {
                (a.diff(i) * (**b).clone() - (**a).clone() * b.diff(i)) / Expr::Powi(b.clone(), 2)
            }
            Expr::Neg(a) => -a.diff(i),
            Expr::Powi(a, n) => match n {
                0 => c(0.0),
                1 => a.diff(i),
                _ => c(*n as f64) * Expr::Powi(a.clone(), n - 1) * a.diff(i),
            },
            Expr::Sin(a) => Expr::Cos(a.clone()) * a.diff(i),
            Expr::Cos(a) => -(Expr::Sin(a.clone()) * a.diff(i)),
            Expr::Exp(a) => Expr::Exp(a.clone()) * a.diff(i),
            Expr::Ln(a) => a.diff(i) / (**a).clone(),
            Expr::Sqrt(a) => a.diff(i) / (c(2.0) * Expr::Sqrt(a.clone())),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        match (&self, &o) {
            (_, _) if o.is_zero() => self,
            (_, _) if self.is_zero() => o,
            (Expr::Const(a), Expr::Const(b)) => c(a + b),
            _ => Expr::Add(Box::new(self), Box::new(o)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        match (&self, &o) {
            (_, _) if o.is_zero() => self,
            (_, _) if self.is_zero() => -o,
            (Expr::Const(a), Expr::Const(b)) => c(a - b),
            _ => Expr::Sub(Box::new(self), Box::new(o)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        match (&self, &o) {
            (_, _) if self.is_zero() || o.is_zero() => c(0.0),
            (Expr::Const(a), _) if *a == 1.0 => o,
            (_, Expr::Const(b)) if *b == 1.0 => self,
            (Expr::Const(a), Expr::Const(b)) => c(a * b),
            _ => Expr::Mul(Box::new(self), Box::new(o)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        match (&self, &o) {
            (_, _) if self.is_zero() => c(0.0),
            (_, Expr::Const(b)) if *b == 1.0 => self,
            (Expr::Const(a), Expr::Const(b)) => c(a / b),
            _ => Expr::Div(Box::new(self), Box::new(o)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(v) => c(-v),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/({b})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Powi(a, n) => write!(f, "({a})^{n}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// A vector of expressions viewed as a smooth map.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMap {
    pub dim_in: usize,
    pub exprs: Vec<Expr>,
}

impl ExprMap {
    pub fn new(dim_in: usize, exprs: Vec<Expr>) -> Self {
        debug_assert!(exprs.iter().all(|e| e.arity() <= dim_in));
        ExprMap { dim_in, exprs }
    }

    pub fn scalar(dim_in: usize, e: Expr) -> Self {
        ExprMap::new(dim_in, alloc::vec![e])
    }
}

impl SmoothMap for ExprMap {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.exprs.len()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        self.exprs.iter().map(|e| e.eval(z)).collect()
    }
}
