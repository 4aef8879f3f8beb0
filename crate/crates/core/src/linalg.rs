//! Dense linear algebra over any [`Scalar`], including dual numbers.
//!
//! nalgebra's decompositions require `ComplexField`, which the AD types do not
//! implement, so the handful of factorizations used in the generic paths live
//! here. Pivoting decisions look only at real parts.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Solve `a x = b` for a square `a` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol` in magnitude.
pub fn solve<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>, tol: f64) -> Option<DMatrix<S>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "solve: matrix must be square");
    assert_eq!(b.nrows(), n, "solve: right-hand side has wrong row count");
    let m = b.ncols();
    let mut a = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].re().abs();
        for r in col + 1..n {
            let v = a[(r, col)].re().abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > tol) {
            return None;
        }
        if piv != col {
            a.swap_rows(piv, col);
            x.swap_rows(piv, col);
        }
        let inv = S::one() / a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] * inv;
            if f.re() == 0.0 && f == S::zero() {
                continue;
            }
            for c in col..n {
                let t = a[(col, c)];
                a[(r, c)] -= f * t;
            }
            for c in 0..m {
                let t = x[(col, c)];
                x[(r, c)] -= f * t;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = S::one() / a[(col, col)];
        for c in 0..m {
            let mut acc = x[(col, c)];
            for k in col + 1..n {
                acc -= a[(col, k)] * x[(k, c)];
            }
            x[(col, c)] = acc * inv;
        }
    }
    Some(x)
}

pub fn inverse<S: Scalar>(a: &DMatrix<S>) -> Option<DMatrix<S>> {
    let n = a.nrows();
    solve(a, &DMatrix::identity(n, n), 1e-300)
}

pub fn determinant<S: Scalar>(a: &DMatrix<S>) -> S {
    let n = a.nrows();
    let mut a = a.clone();
    let mut det = S::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].re().abs();
        for r in col + 1..n {
            let v = a[(r, col)].re().abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return S::zero();
        }
        if piv != col {
            a.swap_rows(piv, col);
            det = -det;
        }
        let p = a[(col, col)];
        det *= p;
        let inv = S::one() / p;
        for r in col + 1..n {
            let f = a[(r, col)] * inv;
            for c in col..n {
                let t = a[(col, c)];
                a[(r, c)] -= f * t;
            }
        }
    }
    det
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.re() * v.re()).sum::<f64>().sqrt();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.map(|v| v.scale(scale));
    let mut result = DMatrix::<S>::identity(n, n);
    let mut term = DMatrix::<S>::identity(n, n);
    // ‖x‖ ≤ 1/4, so 14 terms leave a remainder below 1e-20.
    for k in 1..=14 {
        term = (&term * &x).map(|v| v.scale(1.0 / k as f64));
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn to_f64<S: Scalar>(a: &DMatrix<S>) -> DMatrix<f64> {
    a.map(|v| v.re())
}

pub fn lift_matrix<S: Scalar>(a: &DMatrix<f64>) -> DMatrix<S> {
    a.map(S::from_f64)
}

pub fn column<S: Scalar>(a: &DMatrix<S>, j: usize) -> Vec<S> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn solve_and_inverse_round_trip() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, -1.0, 3.0, 4.0, 0.5, 2.0]);
        let inv = inverse(&a).unwrap();
        let prod = &a * &inv;
        assert!(max_abs(&(prod - DMatrix::identity(3, 3))) < 1e-14);
        let d = determinant(&a);
        assert!((d - a.clone().determinant()).abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve(&a, &DMatrix::identity(2, 2), 1e-12).is_none());
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7_f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a);
        let want = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!(max_abs(&(e - want)) < 1e-15);
        let big = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -3.0]);
        let e = expm(&big);
        assert!((e[(0, 0)] / 3f64.exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expm_differentiates_through_duals() {
        // d/dt exp(tA) at t = 0.4 equals A exp(0.4 A)
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -0.5, 0.3]);
        let ad = a.map(|v| Dual::new(0.4 * v, v));
        let e = expm(&ad);
        let val = expm(&a.map(|v| 0.4 * v));
        let want = &a * &val;
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[(i, j)].re - val[(i, j)]).abs() < 1e-14);
                assert!((e[(i, j)].eps - want[(i, j)]).abs() < 1e-13);
            }
        }
    }
}
