//! Scalar types for forward-mode differentiation.
//!
//! Every smooth expression in the crate (group actions, sections, Hamiltonians)
//! is written once against [`Scalar`] and evaluated on `f64`, on nested
//! [`Dual`] numbers for first/second/third derivatives, or on [`Jet`]
//! truncated Taylor series for jet prolongation.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, One, Zero};

/// A real field element that can flow through the generic numerical code.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Zero
    + One
{
    fn from_f64(v: f64) -> Self;
    /// The underlying real value, with every infinitesimal part dropped.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    fn is_finite(&self) -> bool {
        self.re().is_finite()
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Float::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        Float::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        Float::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        Float::cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        Float::atan2(self, x)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        Float::powi(self, n)
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`, generic over its
/// component type so that duals nest (`Dual<Dual<f64>>` carries mixed second
/// derivatives).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }

    /// The independent variable seeded at `re`.
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }

    /// `1·ε`.
    pub fn epsilon() -> Self {
        Dual {
            re: S::zero(),
            eps: S::one(),
        }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual {
            re: self.re - o.re,
            eps: self.eps - o.eps,
        }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.re;
        let q = self.re * inv;
        Dual {
            re: q,
            eps: (self.eps - q * o.eps) * inv,
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            eps: -self.eps,
        }
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl<S: Scalar> MulAssign for Dual<S> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}
impl<S: Scalar> DivAssign for Dual<S> {
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<S: Scalar> Zero for Dual<S> {
    fn zero() -> Self {
        Dual {
            re: S::zero(),
            eps: S::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<S: Scalar> One for Dual<S> {
    fn one() -> Self {
        Dual::constant(S::one())
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(S::from_f64(v))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual {
            re: s,
            eps: self.eps / (s + s),
        }
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual {
            re: e,
            eps: self.eps * e,
        }
    }
    fn ln(self) -> Self {
        Dual {
            re: self.re.ln(),
            eps: self.eps / self.re,
        }
    }
    fn sin(self) -> Self {
        Dual {
            re: self.re.sin(),
            eps: self.eps * self.re.cos(),
        }
    }
    fn cos(self) -> Self {
        Dual {
            re: self.re.cos(),
            eps: -(self.eps * self.re.sin()),
        }
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = x.re * x.re + self.re * self.re;
        Dual {
            re: self.re.atan2(x.re),
            eps: (x.re * self.eps - self.re * x.eps) / r2,
        }
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let p = self.re.powi(n - 1);
        Dual {
            re: p * self.re,
            eps: self.eps * p.scale(n as f64),
        }
    }
}

/// Number of Taylor coefficients carried by a [`Jet`] (degree ≤ 3).
pub const JET_LEN: usize = 4;

/// Truncated univariate Taylor series `Σ c_k h^k`, `k < JET_LEN`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<S> {
    pub c: [S; JET_LEN],
}

impl<S: Scalar> Jet<S> {
    pub fn constant(v: S) -> Self {
        let mut c = [S::zero(); JET_LEN];
        c[0] = v;
        Jet { c }
    }

    /// `v + h`.
    pub fn variable(v: S) -> Self {
        let mut c = [S::zero(); JET_LEN];
        c[0] = v;
        c[1] = S::one();
        Jet { c }
    }

    pub fn from_coeffs(coeffs: &[S]) -> Self {
        let mut c = [S::zero(); JET_LEN];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Jet { c }
    }

    /// Taylor coefficients of the derivative series.
    fn derivative(&self) -> Self {
        let mut c = [S::zero(); JET_LEN];
        for k in 0..JET_LEN - 1 {
            c[k] = self.c[k + 1].scale((k + 1) as f64);
        }
        Jet { c }
    }

    /// Antiderivative with constant term `c0`.
    fn integrate(&self, c0: S) -> Self {
        let mut c = [S::zero(); JET_LEN];
        c[0] = c0;
        for k in 1..JET_LEN {
            c[k] = self.c[k - 1].scale(1.0 / k as f64);
        }
        Jet { c }
    }

    /// The `k`-th derivative at `h = 0`.
    pub fn derivative_at_zero(&self, k: usize) -> S {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k].scale(f)
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a += b;
        }
        Jet { c }
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a -= b;
        }
        Jet { c }
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [S::zero(); JET_LEN];
        for i in 0..JET_LEN {
            for j in 0..JET_LEN - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.c[0];
        let mut q = [S::zero(); JET_LEN];
        for k in 0..JET_LEN {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * q[k - j];
            }
            q[k] = acc * inv;
        }
        Jet { c: q }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Jet { c }
    }
}

impl<S: Scalar> AddAssign for Jet<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl<S: Scalar> SubAssign for Jet<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl<S: Scalar> MulAssign for Jet<S> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}
impl<S: Scalar> DivAssign for Jet<S> {
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<S: Scalar> Zero for Jet<S> {
    fn zero() -> Self {
        Jet {
            c: [S::zero(); JET_LEN],
        }
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }
}

impl<S: Scalar> One for Jet<S> {
    fn one() -> Self {
        Jet::constant(S::one())
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(S::from_f64(v))
    }
    fn re(&self) -> f64 {
        self.c[0].re()
    }
    fn sqrt(self) -> Self {
        let mut s = [S::zero(); JET_LEN];
        s[0] = self.c[0].sqrt();
        let two_s0 = s[0] + s[0];
        for k in 1..JET_LEN {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s[k] = acc / two_s0;
        }
        Jet { c: s }
    }
    fn exp(self) -> Self {
        let mut e = [S::zero(); JET_LEN];
        e[0] = self.c[0].exp();
        for k in 1..JET_LEN {
            let mut acc = S::zero();
            for j in 1..=k {
                acc += self.c[j].scale(j as f64) * e[k - j];
            }
            e[k] = acc.scale(1.0 / k as f64);
        }
        Jet { c: e }
    }
    fn ln(self) -> Self {
        let d = self.derivative() / self;
        d.integrate(self.c[0].ln())
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn atan2(self, x: Self) -> Self {
        let d = (x * self.derivative() - self * x.derivative()) / (x * x + self * self);
        d.integrate(self.c[0].atan2(x.c[0]))
    }
}

impl<S: Scalar> Jet<S> {
    fn sin_cos(self) -> (Self, Self) {
        let mut s = [S::zero(); JET_LEN];
        let mut c = [S::zero(); JET_LEN];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..JET_LEN {
            let mut as_ = S::zero();
            let mut ac = S::zero();
            for j in 1..=k {
                let ja = self.c[j].scale(j as f64);
                as_ += ja * c[k - j];
                ac += ja * s[k - j];
            }
            s[k] = as_.scale(1.0 / k as f64);
            c[k] = -ac.scale(1.0 / k as f64);
        }
        (Jet { c: s }, Jet { c })
    }
}

/// Lift a slice of constants into any scalar type.
pub fn lift<S: Scalar>(x: &[f64]) -> alloc::vec::Vec<S> {
    x.iter().map(|&v| S::from_f64(v)).collect()
}

/// Real parts of a slice.
pub fn values<S: Scalar>(x: &[S]) -> alloc::vec::Vec<f64> {
    x.iter().map(Scalar::re).collect()
}
