//! Smooth maps `Rⁿ → Rᵐ` that can be evaluated on any [`Scalar`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::scalar::{Dual, Scalar};

pub trait SmoothMap {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S>;
}

impl<T: SmoothMap> SmoothMap for &T {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        (**self).eval(z)
    }
}

/// Value and derivative of `f` at `z` in direction `dir`.
pub fn directional<F: SmoothMap, S: Scalar>(f: &F, z: &[S], dir: &[S]) -> (Vec<S>, Vec<S>) {
    let zd: Vec<Dual<S>> = z.iter().zip(dir).map(|(&a, &b)| Dual::new(a, b)).collect();
    let out = f.eval(&zd);
    (
        out.iter().map(|d| d.re).collect(),
        out.iter().map(|d| d.eps).collect(),
    )
}

/// Jacobian `∂f_i/∂z_j`, one dual pass per input.
pub fn jacobian<F: SmoothMap, S: Scalar>(f: &F, z: &[S]) -> DMatrix<S> {
    let n = z.len();
    let mut jac = DMatrix::<S>::zeros(f.dim_out(), n);
    let mut dir = vec![S::zero(); n];
    for j in 0..n {
        dir[j] = S::one();
        let (_, d) = directional(f, z, &dir);
        for (i, v) in d.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
        dir[j] = S::zero();
    }
    jac
}

/// Gradient of the first output component.
pub fn gradient<F: SmoothMap, S: Scalar>(f: &F, z: &[S]) -> Vec<S> {
    let n = z.len();
    let mut dir = vec![S::zero(); n];
    let mut g = Vec::with_capacity(n);
    for j in 0..n {
        dir[j] = S::one();
        g.push(directional(f, z, &dir).1[0]);
        dir[j] = S::zero();
    }
    g
}

/// Evaluate the first output component at real arguments.
pub fn value<F: SmoothMap>(f: &F, z: &[f64]) -> f64 {
    f.eval(z)[0]
}

/// A constant map.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim_in: usize,
    pub value: Vec<f64>,
}

impl SmoothMap for Constant {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.value.len()
    }
    fn eval<S: Scalar>(&self, _z: &[S]) -> Vec<S> {
        self.value.iter().map(|&v| S::from_f64(v)).collect()
    }
}

/// Central-difference Jacobian, used only as a test oracle.
pub fn fd_jacobian<F: SmoothMap>(f: &F, z: &[f64], h: f64) -> DMatrix<f64> {
    let n = z.len();
    let mut jac = DMatrix::zeros(f.dim_out(), n);
    let mut zp = z.to_vec();
    for j in 0..n {
        zp[j] = z[j] + h;
        let fp = f.eval(&zp);
        zp[j] = z[j] - h;
        let fm = f.eval(&zp);
        zp[j] = z[j];
        for i in 0..fp.len() {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Polar;
    impl SmoothMap for Polar {
        fn dim_in(&self) -> usize {
            2
        }
        fn dim_out(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
            vec![z[0] * z[1].cos(), z[0] * z[1].sin()]
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let z = [1.3, 0.4];
        let j = jacobian(&Polar, &z);
        let fd = fd_jacobian(&Polar, &z, 1e-5);
        for (a, b) in j.iter().zip(fd.iter()) {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()));
        }
        let real = Polar.eval(&z);
        let (val, _) = directional(&Polar, &z, &[1.0, 0.0]);
        assert_eq!(real, val);
    }
}
