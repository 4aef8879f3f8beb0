//! The two brackets on sections `M → g`, the anchor, and residuals of the
//! Lie algebroid axioms.
//!
//! A section is any [`SmoothMap`] returning the `r` basis coefficients. The
//! brackets are themselves smooth maps, so they nest: evaluating
//! `⟦x, ⟦y, w⟧⟧` differentiates the inner bracket with dual numbers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::action::{sample_point, GroupAction};
use crate::expr::{c, var, ExprMap};
use crate::lie::LieAlgebra;
use crate::sample;
use crate::scalar::Scalar;
use crate::smooth::{directional, SmoothMap};

fn nan_vec<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::from_f64(f64::NAN); n]
}

fn mat_vec<S: Scalar>(m: &DMatrix<S>, x: &[S]) -> Vec<S> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).fold(S::zero(), |acc, j| acc + m[(i, j)] * x[j]))
        .collect()
}

/// `ρ(x)(z) = Φ(z) x(z)`.
pub fn anchor_at<A: GroupAction, X: SmoothMap, S: Scalar>(action: &A, x: &X, z: &[S]) -> Vec<S> {
    match action.infinitesimals(z) {
        Ok(phi) => mat_vec(&phi, &x.eval(z)),
        Err(_) => nan_vec(action.dim()),
    }
}

/// The vector field `ρ(x)` as a smooth map on `M`.
pub struct Anchor<'a, A, X> {
    pub action: &'a A,
    pub x: &'a X,
}

impl<A: GroupAction, X: SmoothMap> SmoothMap for Anchor<'_, A, X> {
    fn dim_in(&self) -> usize {
        self.action.dim()
    }
    fn dim_out(&self) -> usize {
        self.action.dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        anchor_at(self.action, self.x, z)
    }
}

/// The pointwise bracket `[x(z), y(z)]`.
pub struct Pointwise<'a, X, Y> {
    pub alg: &'a LieAlgebra,
    pub x: &'a X,
    pub y: &'a Y,
}

impl<X: SmoothMap, Y: SmoothMap> SmoothMap for Pointwise<'_, X, Y> {
    fn dim_in(&self) -> usize {
        self.x.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.alg.dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        self.alg.bracket(&self.x.eval(z), &self.y.eval(z))
    }
}

/// Component-wise Lie derivative `L_{ρ(x)} y`.
pub struct LieDerivative<'a, A, X, Y> {
    pub action: &'a A,
    pub x: &'a X,
    pub y: &'a Y,
}

impl<A: GroupAction, X: SmoothMap, Y: SmoothMap> SmoothMap for LieDerivative<'_, A, X, Y> {
    fn dim_in(&self) -> usize {
        self.action.dim()
    }
    fn dim_out(&self) -> usize {
        self.y.dim_out()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let rho = anchor_at(self.action, self.x, z);
        directional(self.y, z, &rho).1
    }
}

/// The second bracket: `L_{ρ(x)}y − L_{ρ(y)}x − [x,y]` for left actions and
/// `−L_{ρ(x)}y + L_{ρ(y)}x − [x,y]` for right actions.
pub struct SecondBracket<'a, A, X, Y> {
    pub action: &'a A,
    pub x: &'a X,
    pub y: &'a Y,
}

impl<'a, A, X, Y> SecondBracket<'a, A, X, Y> {
    pub fn new(action: &'a A, x: &'a X, y: &'a Y) -> Self {
        SecondBracket { action, x, y }
    }
}

impl<A: GroupAction, X: SmoothMap, Y: SmoothMap> SmoothMap for SecondBracket<'_, A, X, Y> {
    fn dim_in(&self) -> usize {
        self.action.dim()
    }
    fn dim_out(&self) -> usize {
        self.action.algebra().dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let r = self.action.algebra().dim();
        let phi = match self.action.infinitesimals(z) {
            Ok(p) => p,
            Err(_) => return nan_vec(r),
        };
        let xv = self.x.eval(z);
        let yv = self.y.eval(z);
        let rho_x = mat_vec(&phi, &xv);
        let rho_y = mat_vec(&phi, &yv);
        let dy = directional(self.y, z, &rho_x).1;
        let dx = directional(self.x, z, &rho_y).1;
        let br = self.action.algebra().bracket(&xv, &yv);
        let s = self.action.parity().sign();
        (0..r).map(|k| (dy[k] - dx[k]).scale(s) - br[k]).collect()
    }
}

/// `f(z) y(z)` for a scalar function `f`.
pub struct Scaled<'a, F, Y> {
    pub f: &'a F,
    pub y: &'a Y,
}

impl<F: SmoothMap, Y: SmoothMap> SmoothMap for Scaled<'_, F, Y> {
    fn dim_in(&self) -> usize {
        self.y.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.y.dim_out()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let f = self.f.eval(z)[0];
        self.y.eval(z).into_iter().map(|v| f * v).collect()
    }
}

/// Bracket of vector fields `[X, Y]^i = X·∇Y^i − Y·∇X^i`.
pub fn vector_field_bracket<X: SmoothMap, Y: SmoothMap>(x: &X, y: &Y, z: &[f64]) -> Vec<f64> {
    let xv = x.eval(z);
    let yv = y.eval(z);
    let dy = directional(y, z, &xv).1;
    let dx = directional(x, z, &yv).1;
    dy.iter().zip(&dx).map(|(a, b)| a - b).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Sample points inside the action's domain guard with a fixed seed.
pub fn sample_points<A: GroupAction>(action: &A, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = sample::rng(seed);
    (0..count).map(|_| sample_point(action, &mut rng)).collect()
}

/// `sup ‖⟦x, f y⟧ − f⟦x,y⟧ − ±(L_{ρ(x)} f) y‖` over the points; the sign is
/// the action's parity.
pub fn leibniz_residual<A, X, Y, F>(action: &A, x: &X, y: &Y, f: &F, points: &[Vec<f64>]) -> f64
where
    A: GroupAction,
    X: SmoothMap,
    Y: SmoothMap,
    F: SmoothMap,
{
    let fy = Scaled { f, y };
    let lhs = SecondBracket::new(action, x, &fy);
    let plain = SecondBracket::new(action, x, y);
    let s = action.parity().sign();
    let mut worst: f64 = 0.0;
    for z in points {
        let l = lhs.eval(z.as_slice());
        let p = plain.eval(z.as_slice());
        let fz = f.eval(z.as_slice())[0];
        let rho = anchor_at(action, x, z.as_slice());
        let df = directional(f, z.as_slice(), &rho).1[0];
        let yv = y.eval(z.as_slice());
        let rhs: Vec<f64> = (0..p.len()).map(|k| fz * p[k] + s * df * yv[k]).collect();
        worst = worst.max(max_diff(&l, &rhs));
    }
    worst
}

/// `sup ‖ρ(⟦x,y⟧) − ±[ρ(x), ρ(y)]‖`; the anchor is a homomorphism for left
/// actions and an anti-homomorphism for right actions.
pub fn anchor_homomorphism_residual<A, X, Y>(action: &A, x: &X, y: &Y, points: &[Vec<f64>]) -> f64
where
    A: GroupAction,
    X: SmoothMap,
    Y: SmoothMap,
{
    let br = SecondBracket::new(action, x, y);
    let rx = Anchor { action, x };
    let ry = Anchor { action, x: y };
    let s = action.parity().sign();
    let mut worst: f64 = 0.0;
    for z in points {
        let lhs = anchor_at(action, &br, z.as_slice());
        let rhs: Vec<f64> = vector_field_bracket(&rx, &ry, z)
            .into_iter()
            .map(|v| s * v)
            .collect();
        worst = worst.max(max_diff(&lhs, &rhs));
    }
    worst
}

/// `sup ‖⟦x,⟦y,w⟧⟧ + ⟦y,⟦w,x⟧⟧ + ⟦w,⟦x,y⟧⟧‖`.
pub fn jacobi_residual_sections<A, X, Y, W>(
    action: &A,
    x: &X,
    y: &Y,
    w: &W,
    points: &[Vec<f64>],
) -> f64
where
    A: GroupAction,
    X: SmoothMap,
    Y: SmoothMap,
    W: SmoothMap,
{
    let yw = SecondBracket::new(action, y, w);
    let wx = SecondBracket::new(action, w, x);
    let xy = SecondBracket::new(action, x, y);
    let t1 = SecondBracket::new(action, x, &yw);
    let t2 = SecondBracket::new(action, y, &wx);
    let t3 = SecondBracket::new(action, w, &xy);
    let mut worst: f64 = 0.0;
    for z in points {
        let (a, b, c) = (
            t1.eval(z.as_slice()),
            t2.eval(z.as_slice()),
            t3.eval(z.as_slice()),
        );
        let sum: Vec<f64> = (0..a.len()).map(|k| a[k] + b[k] + c[k]).collect();
        worst = worst.max(max_abs(&sum));
    }
    worst
}

/// `sup ‖⟦x,y⟧ + ⟦y,x⟧‖`.
pub fn antisymmetry_residual<A: GroupAction, X: SmoothMap, Y: SmoothMap>(
    action: &A,
    x: &X,
    y: &Y,
    points: &[Vec<f64>],
) -> f64 {
    let a = SecondBracket::new(action, x, y);
    let b = SecondBracket::new(action, y, x);
    points
        .iter()
        .map(|z| {
            let (u, v) = (a.eval(z.as_slice()), b.eval(z.as_slice()));
            u.iter()
                .zip(&v)
                .map(|(p, q)| (p + q).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Random quadratic section `M → g` with `r` components in `p` variables.
pub fn polynomial_section(seed: u64, r: usize, p: usize) -> ExprMap {
    let mut rng = sample::rng(seed);
    let mut exprs = Vec::new();
    for _ in 0..r {
        let mut e = c(sample::uniform(&mut rng, -1.0, 1.0));
        for i in 0..p {
            e = e + c(sample::uniform(&mut rng, -1.0, 1.0)) * var(i);
            e = e + c(sample::uniform(&mut rng, -0.5, 0.5)) * var(i) * var(i);
        }
        exprs.push(e);
    }
    ExprMap::new(p, exprs)
}
