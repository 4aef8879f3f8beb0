//! The local group of sections `M → G` under the ∗-product.
//!
//! Left actions: `(g∗h)(s) = g(h(s)·s) h(s)`. Right actions:
//! `(g∗h)(s) = g(s) h(s·g(s))`. In both cases `λ(g, s)` is the action's
//! `act`, so one code path serves both parities.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::action::{ActionError, GroupAction, Parity};
use crate::algebroid::SecondBracket;
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::scalar::{self, Scalar};
use crate::smooth::{self, SmoothMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StarError {
    #[error("point left the domain of the action")]
    OutOfDomain,
    #[error("∗-inverse iteration did not converge (residual {residual:.3e})")]
    NotInvertible { residual: f64 },
    #[error("section is too far from the unit section (C¹ distance {distance:.3e})")]
    TooFar { distance: f64 },
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// A map `z ↦ g(z) ∈ G` evaluable on any scalar.
pub trait GroupSection {
    fn rep_dim(&self) -> usize;
    fn at<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, StarError>;
}

impl<T: GroupSection> GroupSection for &T {
    fn rep_dim(&self) -> usize {
        (**self).rep_dim()
    }
    fn at<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, StarError> {
        (**self).at(z)
    }
}

/// `e(s) = I`.
#[derive(Debug, Clone, Copy)]
pub struct UnitSection {
    pub n: usize,
}

impl GroupSection for UnitSection {
    fn rep_dim(&self) -> usize {
        self.n
    }
    fn at<S: Scalar>(&self, _z: &[S]) -> Result<DMatrix<S>, StarError> {
        Ok(DMatrix::identity(self.n, self.n))
    }
}

#[derive(Debug, Clone)]
pub struct ConstantSection {
    pub g: DMatrix<f64>,
}

impl GroupSection for ConstantSection {
    fn rep_dim(&self) -> usize {
        self.g.nrows()
    }
    fn at<S: Scalar>(&self, _z: &[S]) -> Result<DMatrix<S>, StarError> {
        Ok(linalg::lift_matrix(&self.g))
    }
}

/// `s ↦ exp(t·x(s))` for an algebra-valued section `x`.
pub struct ExpSection<'a, X> {
    pub alg: &'a LieAlgebra,
    pub x: &'a X,
    pub t: f64,
}

impl<X: SmoothMap> GroupSection for ExpSection<'_, X> {
    fn rep_dim(&self) -> usize {
        self.alg.rep_dim()
    }
    fn at<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, StarError> {
        let m = self.alg.element(&self.x.eval(z)) * S::from_f64(self.t);
        Ok(linalg::expm(&m))
    }
}

fn act_checked<A: GroupAction, S: Scalar>(
    action: &A,
    g: &DMatrix<S>,
    z: &[S],
) -> Result<Vec<S>, StarError> {
    let w = action.act(g, z)?;
    if !action.in_domain(&scalar::values(&w)) {
        return Err(StarError::OutOfDomain);
    }
    Ok(w)
}

pub struct StarProduct<'a, A, G, H> {
    pub action: &'a A,
    pub g: G,
    pub h: H,
}

pub fn star_product<A: GroupAction, G: GroupSection, H: GroupSection>(
    action: &A,
    g: G,
    h: H,
) -> StarProduct<'_, A, G, H> {
    StarProduct { action, g, h }
}

impl<A: GroupAction, G: GroupSection, H: GroupSection> GroupSection for StarProduct<'_, A, G, H> {
    fn rep_dim(&self) -> usize {
        self.g.rep_dim()
    }
    fn at<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, StarError> {
        match self.action.parity() {
            Parity::Left => {
                let h = self.h.at(z)?;
                let w = act_checked(self.action, &h, z)?;
                Ok(self.g.at(&w)? * h)
            }
            Parity::Right => {
                let g = self.g.at(z)?;
                let w = act_checked(self.action, &g, z)?;
                Ok(g * self.h.at(&w)?)
            }
        }
    }
}

/// `w ↦ λ(g(w), w)`.
struct Displaced<'a, A, G> {
    action: &'a A,
    g: &'a G,
}

impl<A: GroupAction, G: GroupSection> SmoothMap for Displaced<'_, A, G> {
    fn dim_in(&self) -> usize {
        self.action.dim()
    }
    fn dim_out(&self) -> usize {
        self.action.dim()
    }
    fn eval<S: Scalar>(&self, w: &[S]) -> Vec<S> {
        let nan = || alloc::vec![S::from_f64(f64::NAN); w.len()];
        match self.g.at(w) {
            Ok(g) => self.action.act(&g, w).unwrap_or_else(|_| nan()),
            Err(_) => nan(),
        }
    }
}

/// The local ∗-inverse, evaluated pointwise by solving `λ(g(w), w) = s`.
pub struct StarInverse<'a, A, G> {
    pub action: &'a A,
    pub g: G,
    pub max_iter: usize,
    pub tol: f64,
}

pub const INVERSE_ITERATIONS: usize = 50;
pub const NEIGHBORHOOD: f64 = 0.2;

/// `sup_s (‖g(s) − I‖ + ‖∂g/∂s‖)` over the points, max-entry norms.
pub fn c1_distance<G: GroupSection>(g: &G, points: &[Vec<f64>]) -> Result<f64, StarError> {
    let n = g.rep_dim();
    let mut worst: f64 = 0.0;
    for z in points {
        let v = g.at(z.as_slice())?;
        let mut d = linalg::max_abs(&(v - DMatrix::identity(n, n)));
        for l in 0..z.len() {
            let zd: Vec<scalar::Dual<f64>> = z
                .iter()
                .enumerate()
                .map(|(i, &x)| scalar::Dual::new(x, if i == l { 1.0 } else { 0.0 }))
                .collect();
            d = d.max(linalg::max_abs(&g.at(&zd)?.map(|e| e.eps)));
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Builds the ∗-inverse after checking the section is within `threshold` of
/// the unit section on the given points.
pub fn star_inverse<'a, A: GroupAction, G: GroupSection>(
    action: &'a A,
    g: G,
    points: &[Vec<f64>],
    threshold: f64,
) -> Result<StarInverse<'a, A, G>, StarError> {
    let distance = c1_distance(&g, points)?;
    if distance > threshold {
        return Err(StarError::TooFar { distance });
    }
    Ok(StarInverse {
        action,
        g,
        max_iter: INVERSE_ITERATIONS,
        tol: 1e-14,
    })
}

impl<A: GroupAction, G: GroupSection> StarInverse<'_, A, G> {
    /// The point `w` with `λ(g(w), w) = s`.
    pub fn base_point(&self, s: &[f64]) -> Result<Vec<f64>, StarError> {
        let f = Displaced {
            action: self.action,
            g: &self.g,
        };
        let mut w = s.to_vec();
        let mut res = f64::INFINITY;
        for _ in 0..self.max_iter {
            let fw = f.eval(w.as_slice());
            let r: Vec<f64> = fw.iter().zip(s).map(|(a, b)| a - b).collect();
            res = r.iter().fold(0.0, |m, v| m.max(v.abs()));
            if !res.is_finite() {
                break;
            }
            if res < self.tol * (1.0 + s.iter().fold(0.0, |m: f64, v| m.max(v.abs()))) {
                return Ok(w);
            }
            let jac = smooth::jacobian(&f, w.as_slice());
            let rhs = DMatrix::from_column_slice(r.len(), 1, &r);
            let Some(step) = linalg::solve(&jac, &rhs, 1e-14) else {
                break;
            };
            for (wi, di) in w.iter_mut().zip(step.iter()) {
                *wi -= di;
            }
        }
        Err(StarError::NotInvertible { residual: res })
    }
}

impl<A: GroupAction, G: GroupSection> GroupSection for StarInverse<'_, A, G> {
    fn rep_dim(&self) -> usize {
        self.g.rep_dim()
    }
    fn at<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, StarError> {
        let w0 = self.base_point(&scalar::values(z))?;
        // Newton polish in S carries the derivatives of the implicit solution.
        let f = Displaced {
            action: self.action,
            g: &self.g,
        };
        let mut w: Vec<S> = scalar::lift(&w0);
        for _ in 0..3 {
            let fw = f.eval(&w);
            let r: Vec<S> = fw.iter().zip(z).map(|(&a, &b)| a - b).collect();
            let jac = smooth::jacobian(&f, &w);
            let rhs = DMatrix::from_column_slice(r.len(), 1, &r);
            let step = linalg::solve(&jac, &rhs, 1e-14)
                .ok_or(StarError::NotInvertible { residual: f64::NAN })?;
            for (wi, di) in w.iter_mut().zip(step.iter()) {
                *wi -= *di;
            }
        }
        let g = self.g.at(&w)?;
        linalg::inverse(&g).ok_or(StarError::NotInvertible { residual: f64::NAN })
    }
}

/// `sup ‖g(s) − h(s)‖` over the points.
pub fn max_distance<G: GroupSection, H: GroupSection>(
    g: &G,
    h: &H,
    points: &[Vec<f64>],
) -> Result<f64, StarError> {
    let mut worst: f64 = 0.0;
    for z in points {
        worst = worst.max(linalg::max_abs(
            &(g.at(z.as_slice())? - h.at(z.as_slice())?),
        ));
    }
    Ok(worst)
}

/// `sup ‖((g∗h)∗f − g∗(h∗f))(s)‖`.
pub fn associativity_residual<A: GroupAction, G: GroupSection, H: GroupSection, F: GroupSection>(
    action: &A,
    g: &G,
    h: &H,
    f: &F,
    points: &[Vec<f64>],
) -> Result<f64, StarError> {
    let left = star_product(action, star_product(action, g, h), f);
    let right = star_product(action, g, star_product(action, h, f));
    max_distance(&left, &right, points)
}

/// `sup ‖λ((g∗h)(s), s) − λ(g, λ(h, s))‖` where `λ(g, s) = λ(g(s), s)`.
pub fn action_property_residual<A: GroupAction, G: GroupSection, H: GroupSection>(
    action: &A,
    g: &G,
    h: &H,
    points: &[Vec<f64>],
) -> Result<f64, StarError> {
    let gh = star_product(action, g, h);
    let mut worst: f64 = 0.0;
    for z in points {
        let z = z.as_slice();
        let lhs = act_checked(action, &gh.at(z)?, z)?;
        let (first, second): (
            DMatrix<f64>,
            &dyn Fn(&[f64]) -> Result<DMatrix<f64>, StarError>,
        ) = match action.parity() {
            Parity::Left => (h.at(z)?, &|w| g.at(w)),
            Parity::Right => (g.at(z)?, &|w| h.at(w)),
        };
        let w = act_checked(action, &first, z)?;
        let rhs = act_checked(action, &second(&w)?, &w)?;
        worst = lhs
            .iter()
            .zip(&rhs)
            .fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(worst)
}

/// `sup ‖(g∗g^{∗−1})(s) − I‖` and `sup ‖(g^{∗−1}∗g)(s) − I‖`.
pub fn inverse_residual<A: GroupAction, G: GroupSection>(
    action: &A,
    inv: &StarInverse<'_, A, G>,
    points: &[Vec<f64>],
) -> Result<f64, StarError> {
    let n = inv.rep_dim();
    let e = UnitSection { n };
    let a = max_distance(&star_product(action, &inv.g, inv), &e, points)?;
    let b = max_distance(&star_product(action, inv, &inv.g), &e, points)?;
    Ok(a.max(b))
}

/// Conjugate `g_ε ∗ h_δ ∗ g_ε^{∗−1}` at one point.
fn conjugate<A: GroupAction, X: SmoothMap, Y: SmoothMap>(
    action: &A,
    x: &X,
    y: &Y,
    eps: f64,
    delta: f64,
    z: &[f64],
) -> Result<DMatrix<f64>, StarError> {
    let alg = action.algebra();
    let g = ExpSection { alg, x, t: eps };
    let h = ExpSection {
        alg,
        x: y,
        t: delta,
    };
    let ginv = StarInverse {
        action,
        g: ExpSection { alg, x, t: eps },
        max_iter: INVERSE_ITERATIONS,
        tol: 1e-15,
    };
    star_product(action, &g, star_product(action, &h, &ginv)).at(z)
}

/// `∂²/∂ε∂δ (g_ε ∗ h_δ ∗ g_ε^{∗−1})(s)` by a mixed central difference,
/// optionally with one level of Richardson extrapolation. Returns algebra
/// coordinates; this should equal `−⟦x, y⟧(s)`.
pub fn bracket_from_conjugation<A: GroupAction, X: SmoothMap, Y: SmoothMap>(
    action: &A,
    x: &X,
    y: &Y,
    eps: f64,
    richardson: bool,
    z: &[f64],
) -> Result<Vec<f64>, StarError> {
    let stencil = |e: f64| -> Result<DMatrix<f64>, StarError> {
        let pp = conjugate(action, x, y, e, e, z)?;
        let pm = conjugate(action, x, y, e, -e, z)?;
        let mp = conjugate(action, x, y, -e, e, z)?;
        let mm = conjugate(action, x, y, -e, -e, z)?;
        Ok((pp - pm - mp + mm) / (4.0 * e * e))
    };
    let d = if richardson {
        let coarse = stencil(eps)?;
        let fine = stencil(eps / 2.0)?;
        (fine * 4.0 - coarse) / 3.0
    } else {
        stencil(eps)?
    };
    Ok(action.algebra().coords(&d))
}

/// `sup ‖bracket_from_conjugation + ⟦x,y⟧‖` over the points.
pub fn conjugation_error<A: GroupAction, X: SmoothMap, Y: SmoothMap>(
    action: &A,
    x: &X,
    y: &Y,
    eps: f64,
    richardson: bool,
    points: &[Vec<f64>],
) -> Result<f64, StarError> {
    let sb = SecondBracket::new(action, x, y);
    let mut worst: f64 = 0.0;
    for z in points {
        let got = bracket_from_conjugation(action, x, y, eps, richardson, z)?;
        let want = sb.eval(z.as_slice());
        worst = got
            .iter()
            .zip(&want)
            .fold(worst, |m, (a, b)| m.max((a + b).abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::algebroid::sample_points;
    use crate::expr::{c, var, Expr, ExprMap};
    use crate::sample;
    use alloc::boxed::Box;
    use alloc::vec;

    fn trig_section(seed: u64, r: usize, scale: f64) -> ExprMap {
        let mut rng = sample::rng(seed);
        let mut u = || c(scale * sample::uniform(&mut rng, -1.0, 1.0));
        let exprs = (0..r)
            .map(|_| {
                u() + u() * Expr::Sin(Box::new(var(0))) + u() * Expr::Cos(Box::new(c(2.0) * var(0)))
            })
            .collect();
        ExprMap::new(1, exprs)
    }

    fn pts(a: &Action) -> Vec<Vec<f64>> {
        sample_points(a, 30, 9)
            .into_iter()
            .map(|z| vec![z[0] * 0.5])
            .collect()
    }

    #[test]
    fn unit_and_constant_laws() {
        let a = Action::catalog("sl2-projective").unwrap();
        let x = trig_section(1, 3, 0.3);
        let g = ExpSection {
            alg: a.algebra(),
            x: &x,
            t: 1.0,
        };
        let e = UnitSection { n: 2 };
        let p = pts(&a);
        assert_eq!(
            max_distance(&star_product(&a, &e, &g), &g, &p).unwrap(),
            0.0
        );
        assert_eq!(
            max_distance(&star_product(&a, &g, &e), &g, &p).unwrap(),
            0.0
        );
        let mut rng = sample::rng(2);
        let g0 = ConstantSection {
            g: sample::group_element(&mut rng, a.algebra(), 0.3),
        };
        let h0 = ConstantSection {
            g: sample::group_element(&mut rng, a.algebra(), 0.3),
        };
        let prod = ConstantSection { g: &g0.g * &h0.g };
        assert!(max_distance(&star_product(&a, &g0, &h0), &prod, &p).unwrap() < 1e-15);
    }

    #[test]
    fn associativity_and_action_property() {
        for name in ["sl2-projective", "sl2-projective-right", "sl2-circle"] {
            let a = Action::catalog(name).unwrap();
            let (x, y, w) = (
                trig_section(3, 3, 0.3),
                trig_section(4, 3, 0.3),
                trig_section(5, 3, 0.3),
            );
            let g = ExpSection {
                alg: a.algebra(),
                x: &x,
                t: 1.0,
            };
            let h = ExpSection {
                alg: a.algebra(),
                x: &y,
                t: 1.0,
            };
            let f = ExpSection {
                alg: a.algebra(),
                x: &w,
                t: 1.0,
            };
            let p = pts(&a);
            assert!(
                associativity_residual(&a, &g, &h, &f, &p).unwrap() < 1e-10,
                "{name}"
            );
            assert!(
                action_property_residual(&a, &g, &h, &p).unwrap() < 1e-10,
                "{name}"
            );
        }
    }

    #[test]
    fn inverse_of_small_section() {
        let a = Action::catalog("sl2-projective").unwrap();
        let x = trig_section(6, 3, 0.05);
        let p = pts(&a);
        let inv = star_inverse(
            &a,
            ExpSection {
                alg: a.algebra(),
                x: &x,
                t: 1.0,
            },
            &p,
            NEIGHBORHOOD,
        )
        .unwrap();
        assert!(inverse_residual(&a, &inv, &p).unwrap() < 1e-9);
        let e = star_inverse(&a, UnitSection { n: 2 }, &p, NEIGHBORHOOD).unwrap();
        assert!(max_distance(&e, &UnitSection { n: 2 }, &p).unwrap() < 1e-15);
        let big = trig_section(6, 3, 3.0);
        assert!(matches!(
            star_inverse(
                &a,
                ExpSection {
                    alg: a.algebra(),
                    x: &big,
                    t: 1.0
                },
                &p,
                NEIGHBORHOOD
            ),
            Err(StarError::TooFar { .. })
        ));
    }

    #[test]
    fn constant_inverse_is_group_inverse() {
        let a = Action::catalog("sl2-projective").unwrap();
        let mut rng = sample::rng(8);
        let g0 = sample::group_element(&mut rng, a.algebra(), 0.1);
        let p = pts(&a);
        let inv = star_inverse(&a, ConstantSection { g: g0.clone() }, &p, NEIGHBORHOOD).unwrap();
        let want = ConstantSection {
            g: linalg::inverse(&g0).unwrap(),
        };
        assert!(max_distance(&inv, &want, &p).unwrap() < 1e-13);
    }

    #[test]
    fn translation_bracket() {
        let a = Action::catalog("translation-1").unwrap();
        let x = ExprMap::new(1, vec![var(0) * var(0) + c(1.0)]);
        let y = ExprMap::new(1, vec![c(3.0) * var(0) - c(0.5)]);
        let t = 0.7;
        let got = bracket_from_conjugation(&a, &x, &y, 1e-3, false, &[t]).unwrap()[0];
        let (xv, yv) = (t * t + 1.0, 3.0 * t - 0.5);
        assert!((got + (xv * 3.0 - yv * 2.0 * t)).abs() < 5e-4, "{got}");
    }

    #[test]
    fn trivial_action_gives_commutator() {
        let a = Action::catalog("sl2-trivial").unwrap();
        let (x, y) = (trig_section(10, 3, 1.0), trig_section(11, 3, 1.0));
        let z = [0.4];
        let got = bracket_from_conjugation(&a, &x, &y, 1e-3, true, &z).unwrap();
        let want = a.algebra().bracket(&x.eval(&z[..]), &y.eval(&z[..]));
        assert!(
            got.iter().zip(&want).all(|(p, q)| (p - q).abs() < 1e-6),
            "{got:?} {want:?}"
        );
    }

    #[test]
    fn conjugation_recovers_minus_second_bracket() {
        for name in ["sl2-projective", "sl2-projective-right"] {
            let a = Action::catalog(name).unwrap();
            let (x, y) = (trig_section(12, 3, 1.0), trig_section(13, 3, 1.0));
            let p: Vec<Vec<f64>> = pts(&a).into_iter().take(20).collect();
            let err = conjugation_error(&a, &x, &y, 1e-3, false, &p).unwrap();
            assert!(err < 1e-3, "{name} {err:e}");
            let e1 = conjugation_error(&a, &x, &y, 1e-2, false, &p[..5]).unwrap();
            let e2 = conjugation_error(&a, &x, &y, 5e-3, false, &p[..5]).unwrap();
            assert!((3.0..5.0).contains(&(e1 / e2)), "{name} {e1:e} {e2:e}");
        }
    }
}
