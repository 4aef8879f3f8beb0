//! Loop algebra `C∞(S¹, g)` sampled on a uniform periodic grid: the cocycle
//! `β(x, y) = ∫ tr(x y_s)`, the centrally extended brackets and their
//! Hamiltonian vector fields, and the frozen companion bracket.
//!
//! Sections are stored node-major: coefficient `k` at node `j` sits at
//! `j·r + k`. The bracket on sections used throughout this module is
//! `⟦u, v⟧ = [u, v] − ρ̂(u) v_s + ρ̂(v) u_s` with `ρ̂(u, s) = Φ(s) u`, the
//! anchor terms carrying the parity sign. This is the negative of the
//! algebroid second bracket, so it restricts to the pointwise commutator
//! when the action is trivial.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use thiserror::Error;

use crate::action::{infinitesimal_matrix, ActionError, GroupAction};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("grid size {0} is not a power of two ≥ 4")]
    NotPowerOfTwo(usize),
    #[error("section has {got} values, grid expects {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("trace pairing of the algebra is degenerate")]
    DegeneratePairing,
    #[error("action must act on a one-dimensional base")]
    NotOnCircle,
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// In-place radix-2 FFT; `inverse` applies the conjugate transform without
/// the `1/n` factor.
pub fn fft(buf: &mut [Complex<f64>], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let w = Complex::new(Scalar::cos(ang), Scalar::sin(ang));
        for start in (0..n).step_by(len) {
            let mut wk = Complex::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * wk;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
                wk *= w;
            }
        }
        len <<= 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Spectral,
    Central4,
}

#[derive(Debug, Clone)]
pub struct LoopGrid {
    n: usize,
    kind: Derivative,
    dmat: DMatrix<f64>,
}

impl LoopGrid {
    pub fn new(n: usize, kind: Derivative) -> Result<Self, LoopError> {
        if n < 4 || !n.is_power_of_two() {
            return Err(LoopError::NotPowerOfTwo(n));
        }
        let mut grid = LoopGrid {
            n,
            kind,
            dmat: DMatrix::zeros(n, n),
        };
        let mut dmat = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = grid.derivative_f64(&e);
            dmat.set_column(j, &nalgebra::DVector::from_vec(col));
            e[j] = 0.0;
        }
        grid.dmat = dmat;
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Derivative {
        self.kind
    }

    pub fn h(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.h()).collect()
    }

    /// `∂_s f` of real samples.
    pub fn derivative_f64(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.kind {
            Derivative::Spectral => {
                let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
                fft(&mut buf, false);
                for (k, c) in buf.iter_mut().enumerate() {
                    let freq = if k < n / 2 {
                        k as f64
                    } else if k == n / 2 {
                        0.0
                    } else {
                        k as f64 - n as f64
                    };
                    *c *= Complex::new(0.0, freq);
                }
                fft(&mut buf, true);
                buf.iter().map(|c| c.re / n as f64).collect()
            }
            Derivative::Central4 => {
                let h = self.h();
                (0..n)
                    .map(|j| {
                        let at = |o: isize| f[((j as isize + o).rem_euclid(n as isize)) as usize];
                        (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                    })
                    .collect()
            }
        }
    }

    /// `∂_s f` on any scalar, through the differentiation matrix.
    pub fn derivative<S: Scalar>(&self, f: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| (0..self.n).fold(S::zero(), |acc, j| acc + f[j].scale(self.dmat[(i, j)])))
            .collect()
    }

    /// Trapezoid rule on `[0, 2π)`.
    pub fn integrate<S: Scalar>(&self, f: &[S]) -> S {
        f.iter().fold(S::zero(), |a, &b| a + b).scale(self.h())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSection {
    pub r: usize,
    pub values: Vec<f64>,
}

impl LoopSection {
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(grid: &LoopGrid, r: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.n() * r);
        for s in grid.nodes() {
            let v = f(s);
            debug_assert_eq!(v.len(), r);
            values.extend(v);
        }
        LoopSection { r, values }
    }

    pub fn zeros(grid: &LoopGrid, r: usize) -> Self {
        LoopSection {
            r,
            values: vec![0.0; grid.n() * r],
        }
    }

    pub fn at(&self, j: usize) -> &[f64] {
        &self.values[j * self.r..(j + 1) * self.r]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, o: &LoopSection) -> LoopSection {
        LoopSection {
            r: self.r,
            values: self
                .values
                .iter()
                .zip(&o.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Grid, algebra, trace Gram matrix and the sampled anchor rows `Φ(s_j)`.
#[derive(Debug, Clone)]
pub struct LoopContext {
    pub grid: LoopGrid,
    pub alg: LieAlgebra,
    pub gram: DMatrix<f64>,
    /// `Φ(s_j)` as a row of length `r` per node (zero without an action).
    pub phi: Vec<Vec<f64>>,
    pub sign: f64,
}

impl LoopContext {
    /// Context without an action: `ρ̂ ≡ 0`.
    pub fn bare(grid: LoopGrid, alg: LieAlgebra) -> Self {
        let gram = alg.trace_gram();
        let phi = vec![vec![0.0; alg.dim()]; grid.n()];
        LoopContext {
            grid,
            alg,
            gram,
            phi,
            sign: 1.0,
        }
    }

    pub fn new<A: GroupAction>(grid: LoopGrid, action: &A) -> Result<Self, LoopError> {
        if action.dim() != 1 {
            return Err(LoopError::NotOnCircle);
        }
        let mut ctx = LoopContext::bare(grid, action.algebra().clone());
        for (j, s) in ctx.grid.nodes().into_iter().enumerate() {
            let m = infinitesimal_matrix(action, &[s])?;
            ctx.phi[j] = (0..m.ncols()).map(|k| m[(0, k)]).collect();
        }
        ctx.sign = action.parity().sign();
        Ok(ctx)
    }

    pub fn r(&self) -> usize {
        self.alg.dim()
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn check(&self, x: &LoopSection) -> Result<(), LoopError> {
        let expected = self.n() * self.r();
        if x.r != self.r() || x.values.len() != expected {
            return Err(LoopError::GridMismatch {
                expected,
                got: x.values.len(),
            });
        }
        Ok(())
    }

    /// Componentwise `∂_s`.
    pub fn d<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (n, r) = (self.n(), self.r());
        let mut out = vec![S::zero(); n * r];
        for k in 0..r {
            let comp: Vec<S> = (0..n).map(|j| x[j * r + k]).collect();
            for (j, v) in self.grid.derivative(&comp).into_iter().enumerate() {
                out[j * r + k] = v;
            }
        }
        out
    }

    /// `tr(x y)` at one node.
    fn tr<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let r = self.r();
        let mut acc = S::zero();
        for i in 0..r {
            for j in 0..r {
                let g = self.gram[(i, j)];
                if g != 0.0 {
                    acc += (x[i] * y[j]).scale(g);
                }
            }
        }
        acc
    }

    /// `∫ tr(x y)`.
    pub fn pair<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let r = self.r();
        let vals: Vec<S> = (0..self.n())
            .map(|j| self.tr(&x[j * r..(j + 1) * r], &y[j * r..(j + 1) * r]))
            .collect();
        self.grid.integrate(&vals)
    }

    /// `ρ̂(x, s_j)` at every node.
    pub fn rho_hat<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let r = self.r();
        (0..self.n())
            .map(|j| (0..r).fold(S::zero(), |acc, k| acc + x[j * r + k].scale(self.phi[j][k])))
            .collect()
    }

    /// Pointwise `[x, y]`.
    pub fn commutator<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let r = self.r();
        let mut out = Vec::with_capacity(x.len());
        for j in 0..self.n() {
            out.extend(
                self.alg
                    .bracket(&x[j * r..(j + 1) * r], &y[j * r..(j + 1) * r]),
            );
        }
        out
    }

    /// `⟦x, y⟧ = [x, y] ∓ (ρ̂(x) y_s − ρ̂(y) x_s)`.
    pub fn bracket<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let r = self.r();
        let (xs, ys) = (self.d(x), self.d(y));
        let (rx, ry) = (self.rho_hat(x), self.rho_hat(y));
        let mut out = self.commutator(x, y);
        for j in 0..self.n() {
            for k in 0..r {
                let i = j * r + k;
                out[i] -= (rx[j] * ys[i] - ry[j] * xs[i]).scale(self.sign);
            }
        }
        out
    }

    /// `E(s_j)` with `tr(v_i E) = ρ̂(v_i, s_j)`.
    pub fn e_field(&self) -> Result<LoopSection, LoopError> {
        let r = self.r();
        let det = self.gram.determinant();
        if det.abs() < 1e-12 {
            return Err(LoopError::DegeneratePairing);
        }
        let mut values = Vec::with_capacity(self.n() * r);
        for row in &self.phi {
            let rhs = DMatrix::from_column_slice(r, 1, row);
            let e = linalg::solve(&self.gram, &rhs, 1e-12).ok_or(LoopError::DegeneratePairing)?;
            values.extend(e.iter().copied());
        }
        Ok(LoopSection { r, values })
    }

    /// `max |ρ̂(v_i, s) − tr(v_i E(s))|`.
    pub fn e_field_residual(&self, e: &LoopSection) -> f64 {
        let r = self.r();
        let mut worst: f64 = 0.0;
        for j in 0..self.n() {
            for i in 0..r {
                let mut vi = vec![0.0; r];
                vi[i] = 1.0;
                worst = worst.max((self.phi[j][i] - self.tr(&vi, e.at(j))).abs());
            }
        }
        worst
    }
}

/// `β(x, y) = ∫ tr(x y_s)`.
pub fn cocycle_beta(ctx: &LoopContext, x: &LoopSection, y: &LoopSection) -> Result<f64, LoopError> {
    ctx.check(x)?;
    ctx.check(y)?;
    Ok(ctx.pair(&x.values, &ctx.d(&y.values)))
}

fn beta_raw<S: Scalar>(ctx: &LoopContext, x: &[S], y: &[S]) -> S {
    ctx.pair(x, &ctx.d(y))
}

/// `β` with the trace replaced by the Euclidean product of coefficients;
/// not a cocycle, used as a negative control.
pub fn corrupted_beta(ctx: &LoopContext, x: &LoopSection, y: &LoopSection) -> f64 {
    let ys = ctx.d(&y.values);
    let vals: Vec<f64> = (0..ctx.n())
        .map(|j| {
            (0..ctx.r())
                .map(|k| x.values[j * ctx.r() + k] * ys[j * ctx.r() + k])
                .sum()
        })
        .collect();
    ctx.grid.integrate(&vals)
}

/// `|β(x,[y,z]) + β(y,[z,x]) + β(z,[x,y])|`.
pub fn cocycle_residual_first(
    ctx: &LoopContext,
    x: &LoopSection,
    y: &LoopSection,
    z: &LoopSection,
) -> Result<f64, LoopError> {
    for s in [x, y, z] {
        ctx.check(s)?;
    }
    let (x, y, z) = (&x.values, &y.values, &z.values);
    let t = beta_raw(ctx, x, &ctx.commutator(y, z))
        + beta_raw(ctx, y, &ctx.commutator(z, x))
        + beta_raw(ctx, z, &ctx.commutator(x, y));
    Ok(t.abs())
}

/// `|β(⟦y,z⟧,x) + β(⟦z,x⟧,y) + β(⟦x,y⟧,z)|` for a chosen `β`.
pub fn cocycle_residual_with<B>(
    ctx: &LoopContext,
    x: &LoopSection,
    y: &LoopSection,
    z: &LoopSection,
    beta: B,
) -> Result<f64, LoopError>
where
    B: Fn(&LoopSection, &LoopSection) -> f64,
{
    for s in [x, y, z] {
        ctx.check(s)?;
    }
    let br = |a: &LoopSection, b: &LoopSection| LoopSection {
        r: ctx.r(),
        values: ctx.bracket(&a.values, &b.values),
    };
    Ok((beta(&br(y, z), x) + beta(&br(z, x), y) + beta(&br(x, y), z)).abs())
}

pub fn cocycle_residual_second(
    ctx: &LoopContext,
    x: &LoopSection,
    y: &LoopSection,
    z: &LoopSection,
) -> Result<f64, LoopError> {
    cocycle_residual_with(ctx, x, y, z, |a, b| beta_raw(ctx, &a.values, &b.values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralState {
    pub xi: LoopSection,
    pub r: f64,
}

/// `[x^ξ, δF] − r (δF)_s`.
pub fn ham_vf_first(
    ctx: &LoopContext,
    state: &CentralState,
    df: &LoopSection,
) -> Result<LoopSection, LoopError> {
    ctx.check(&state.xi)?;
    ctx.check(df)?;
    let mut out = ctx.commutator(&state.xi.values, &df.values);
    for (o, d) in out.iter_mut().zip(ctx.d(&df.values)) {
        *o -= state.r * d;
    }
    Ok(LoopSection {
        r: ctx.r(),
        values: out,
    })
}

/// `[x^ξ, δF] − r (δF)_s + (tr(δF E) x^ξ)_s + tr(x^ξ (δF)_s) E`, the anchor
/// terms carrying the parity sign.
pub fn ham_vf_second(
    ctx: &LoopContext,
    e: &LoopSection,
    state: &CentralState,
    df: &LoopSection,
) -> Result<LoopSection, LoopError> {
    let mut out = ham_vf_first(ctx, state, df)?.values;
    let (n, r) = (ctx.n(), ctx.r());
    let x = &state.xi.values;
    let dfs = ctx.d(&df.values);
    let mut weighted = vec![0.0; n * r];
    let mut coef = vec![0.0; n];
    for j in 0..n {
        let tfe = ctx.tr(df.at(j), e.at(j));
        for k in 0..r {
            weighted[j * r + k] = tfe * x[j * r + k];
        }
        coef[j] = ctx.tr(&x[j * r..(j + 1) * r], &dfs[j * r..(j + 1) * r]);
    }
    let dw = ctx.d(&weighted);
    for j in 0..n {
        for k in 0..r {
            let i = j * r + k;
            out[i] += ctx.sign * (dw[i] + coef[j] * e.values[i]);
        }
    }
    Ok(LoopSection { r, values: out })
}

/// `α ∫ tr(x^{ξ₀} ⟦δF, δH⟧)`.
pub fn zero_bracket(
    ctx: &LoopContext,
    xi0: &LoopSection,
    df: &LoopSection,
    dh: &LoopSection,
    alpha: f64,
) -> Result<f64, LoopError> {
    for s in [xi0, df, dh] {
        ctx.check(s)?;
    }
    Ok(alpha * ctx.pair(&xi0.values, &ctx.bracket(&df.values, &dh.values)))
}

/// Brackets of functionals on the sampled dual, written through the
/// variational derivatives.
#[derive(Debug, Clone)]
pub enum LoopBracket {
    /// `∫ tr(x^ξ [δF, δH]) + r β(δF, δH)`.
    First { r: f64 },
    /// `∫ tr(x^ξ ⟦δF, δH⟧) + r β(δF, δH)`.
    Second { r: f64 },
    /// `α ∫ tr(x^{ξ₀} ⟦δF, δH⟧)`.
    Zero { xi0: Vec<f64>, alpha: f64 },
    /// `Second + k·Zero`.
    Pencil {
        r: f64,
        k: f64,
        xi0: Vec<f64>,
        alpha: f64,
    },
}

impl LoopBracket {
    pub fn value<S: Scalar>(&self, ctx: &LoopContext, x: &[S], df: &[S], dh: &[S]) -> S {
        let lift = |v: &[f64]| -> Vec<S> { v.iter().map(|&a| S::from_f64(a)).collect() };
        match self {
            LoopBracket::First { r } => {
                ctx.pair(x, &ctx.commutator(df, dh)) + beta_raw(ctx, df, dh).scale(*r)
            }
            LoopBracket::Second { r } => {
                ctx.pair(x, &ctx.bracket(df, dh)) + beta_raw(ctx, df, dh).scale(*r)
            }
            LoopBracket::Zero { xi0, alpha } => {
                ctx.pair(&lift(xi0), &ctx.bracket(df, dh)).scale(*alpha)
            }
            LoopBracket::Pencil { r, k, xi0, alpha } => {
                let br = ctx.bracket(df, dh);
                ctx.pair(x, &br)
                    + beta_raw(ctx, df, dh).scale(*r)
                    + ctx.pair(&lift(xi0), &br).scale(alpha * k)
            }
        }
    }
}

/// A functional on sampled `x^ξ` with its variational derivative.
pub trait LoopFunctional {
    fn value<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> S;
    fn delta<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> Vec<S>;
}

impl<T: LoopFunctional> LoopFunctional for &T {
    fn value<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> S {
        (**self).value(ctx, x)
    }
    fn delta<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> Vec<S> {
        (**self).delta(ctx, x)
    }
}

/// `F(ξ) = ∫ tr(x^ξ a) + ½ ∫ tr(x^ξ M x^ξ)` with `M` a constant matrix
/// acting on coefficients and `K M` symmetric, so `δF = a + M x^ξ`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: Vec<f64>,
    pub m: DMatrix<f64>,
}

impl Quadratic {
    /// `M = K⁻¹ S` for a symmetric `S`.
    pub fn new(ctx: &LoopContext, a: Vec<f64>, s: &DMatrix<f64>) -> Result<Self, LoopError> {
        let sym = (s + s.transpose()) * 0.5;
        let m = linalg::solve(&ctx.gram, &sym, 1e-12).ok_or(LoopError::DegeneratePairing)?;
        Ok(Quadratic { a, m })
    }

    fn apply<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> Vec<S> {
        let r = ctx.r();
        let mut out = Vec::with_capacity(x.len());
        for j in 0..ctx.n() {
            for i in 0..r {
                let v = (0..r).fold(S::zero(), |acc, k| acc + x[j * r + k].scale(self.m[(i, k)]));
                out.push(v);
            }
        }
        out
    }
}

impl LoopFunctional for Quadratic {
    fn value<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> S {
        let a: Vec<S> = self.a.iter().map(|&v| S::from_f64(v)).collect();
        ctx.pair(x, &a) + ctx.pair(x, &self.apply(ctx, x)).scale(0.5)
    }
    fn delta<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> Vec<S> {
        self.apply(ctx, x)
            .into_iter()
            .zip(&self.a)
            .map(|(v, &a)| v + S::from_f64(a))
            .collect()
    }
}

/// `{F, G}` as a functional; its variational derivative comes from forward
/// differentiation of the value followed by the inverse of the pairing.
pub struct Bracketed<'a, F, G> {
    pub bracket: &'a LoopBracket,
    pub f: F,
    pub g: G,
}

impl<F: LoopFunctional, G: LoopFunctional> LoopFunctional for Bracketed<'_, F, G> {
    fn value<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> S {
        self.bracket
            .value(ctx, x, &self.f.delta(ctx, x), &self.g.delta(ctx, x))
    }

    fn delta<S: Scalar>(&self, ctx: &LoopContext, x: &[S]) -> Vec<S> {
        let (n, r) = (ctx.n(), ctx.r());
        let mut grad = vec![S::zero(); n * r];
        let mut xd: Vec<Dual<S>> = x.iter().map(|&v| Dual::constant(v)).collect();
        for i in 0..n * r {
            xd[i].eps = S::one();
            grad[i] = self.value(ctx, &xd).eps;
            xd[i].eps = S::zero();
        }
        // ∂F/∂x_j = h K δF_j
        let kinv = linalg::inverse(&ctx.gram).unwrap_or_else(|| DMatrix::zeros(r, r));
        let h = ctx.grid.h();
        let mut out = vec![S::zero(); n * r];
        for j in 0..n {
            for i in 0..r {
                out[j * r + i] = (0..r).fold(S::zero(), |acc, k| {
                    acc + grad[j * r + k].scale(kinv[(i, k)] / h)
                });
            }
        }
        out
    }
}

/// `{{F,G},H} + {{G,H},F} + {{H,F},G}` at `x`.
pub fn functional_jacobi<F, G, H>(
    ctx: &LoopContext,
    bracket: &LoopBracket,
    f: &F,
    g: &G,
    h: &H,
    x: &[f64],
) -> f64
where
    F: LoopFunctional,
    G: LoopFunctional,
    H: LoopFunctional,
{
    let t1 = Bracketed {
        bracket,
        f: Bracketed { bracket, f, g },
        g: h,
    }
    .value(ctx, x);
    let t2 = Bracketed {
        bracket,
        f: Bracketed {
            bracket,
            f: g,
            g: h,
        },
        g: f,
    }
    .value(ctx, x);
    let t3 = Bracketed {
        bracket,
        f: Bracketed {
            bracket,
            f: h,
            g: f,
        },
        g,
    }
    .value(ctx, x);
    t1 + t2 + t3
}

/// `Σ_k (c_k cos ks + d_k sin ks)` per coefficient, degrees `0..=deg`.
pub fn trig_section(
    grid: &LoopGrid,
    r: usize,
    deg: usize,
    rng: &mut crate::sample::SampleRng,
    scale: f64,
) -> LoopSection {
    let coeffs: Vec<(f64, f64)> = (0..r * (deg + 1))
        .map(|_| {
            (
                crate::sample::uniform(rng, -1.0, 1.0) * scale,
                crate::sample::uniform(rng, -1.0, 1.0) * scale,
            )
        })
        .collect();
    LoopSection::from_fn(grid, r, |s| {
        (0..r)
            .map(|i| {
                (0..=deg).fold(0.0, |acc, k| {
                    let (c, d) = coeffs[i * (deg + 1) + k];
                    acc + c * Scalar::cos(k as f64 * s) + d * Scalar::sin(k as f64 * s)
                })
            })
            .collect()
    })
}
