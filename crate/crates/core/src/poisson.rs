//! Block Poisson structures on `M × g*`, their Jacobi certification,
//! canonical actions and compatibility of pairs of actions.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::action::{sample_point, ActionError, GroupAction, Parity, PointMap};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::sample::{self, SampleRng};
use crate::scalar::{Dual, Scalar};
use crate::smooth::{self, SmoothMap};

/// An antisymmetric matrix field `Λ(x)` on a coordinate patch.
pub trait Bivector {
    fn dim(&self) -> usize;
    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S>;

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-2.0, 2.0); self.dim()]
    }
}

impl<B: Bivector> Bivector for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        (**self).matrix(x)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        (**self).in_domain(x)
    }
    fn sample_box(&self) -> Vec<(f64, f64)> {
        (**self).sample_box()
    }
}

/// `[[0, Θ], [−Θᵀ, Λ(g*)]]` with `Θ = ±Φ` by parity, in coordinates `(z, ξ)`.
#[derive(Debug, Clone)]
pub struct ActionPoisson<A> {
    pub action: A,
}

pub fn assemble<A: GroupAction>(action: A) -> ActionPoisson<A> {
    ActionPoisson { action }
}

impl<A: GroupAction> ActionPoisson<A> {
    pub fn p(&self) -> usize {
        self.action.dim()
    }

    pub fn r(&self) -> usize {
        self.action.algebra().dim()
    }

    /// `Θ(z) = ±Φ(z)`.
    pub fn theta<S: Scalar>(&self, z: &[S]) -> DMatrix<S> {
        let phi = self
            .action
            .infinitesimals(z)
            .unwrap_or_else(|_| DMatrix::from_element(self.p(), self.r(), S::from_f64(f64::NAN)));
        match self.action.parity() {
            Parity::Left => phi,
            Parity::Right => -phi,
        }
    }
}

impl<A: GroupAction> Bivector for ActionPoisson<A> {
    fn dim(&self) -> usize {
        self.p() + self.r()
    }

    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        let (p, r) = (self.p(), self.r());
        let theta = self.theta(&x[..p]);
        let lp = self.action.algebra().lie_poisson(&x[p..]);
        let mut m = DMatrix::<S>::zeros(p + r, p + r);
        for i in 0..p {
            for k in 0..r {
                m[(i, p + k)] = theta[(i, k)];
                m[(p + k, i)] = -theta[(i, k)];
            }
        }
        m.view_mut((p, p), (r, r)).copy_from(&lp);
        m
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.action.in_domain(&x[..self.p()])
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        let mut b = self.action.sample_box();
        b.extend(core::iter::repeat_n((-2.0, 2.0), self.r()));
        b
    }
}

/// The Lie–Poisson structure of an algebra in its own coordinates.
#[derive(Debug, Clone)]
pub struct LiePoisson {
    pub alg: LieAlgebra,
}

impl Bivector for LiePoisson {
    fn dim(&self) -> usize {
        self.alg.dim()
    }
    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        self.alg.lie_poisson(x)
    }
}

/// Lie–Poisson structure of `g ⋉ Rⁿ`, coordinates `(z, ξ)` with `z` on the
/// translation part.
pub fn semidirect_lie_poisson(alg: &LieAlgebra) -> Result<LiePoisson, crate::lie::LieError> {
    Ok(LiePoisson {
        alg: alg.semidirect()?,
    })
}

/// `(1 − k) Λ₁ + k Λ₂`.
#[derive(Debug, Clone)]
pub struct Pencil<P, Q> {
    pub first: P,
    pub second: Q,
    pub k: f64,
}

pub fn pencil<P: Bivector, Q: Bivector>(first: P, second: Q, k: f64) -> Pencil<P, Q> {
    assert_eq!(
        first.dim(),
        second.dim(),
        "pencil: structures of different dimension"
    );
    Pencil { first, second, k }
}

impl<P: Bivector, Q: Bivector> Bivector for Pencil<P, Q> {
    fn dim(&self) -> usize {
        self.first.dim()
    }
    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        let a = self.first.matrix(x).map(|v| v.scale(1.0 - self.k));
        let b = self.second.matrix(x).map(|v| v.scale(self.k));
        a + b
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.first.in_domain(x) && self.second.in_domain(x)
    }
    fn sample_box(&self) -> Vec<(f64, f64)> {
        self.first.sample_box()
    }
}

/// Draw points inside the structure's domain, rejecting those within `margin`
/// of the guard boundary (probed by coordinate perturbation).
pub fn sample_points<P: Bivector>(p: &P, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = sample::rng(seed);
    sample_points_with(p, count, &mut rng)
}

pub fn sample_points_with<P: Bivector>(p: &P, count: usize, rng: &mut SampleRng) -> Vec<Vec<f64>> {
    let bounds = p.sample_box();
    let margin = 1e-3;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = sample::in_box(rng, &bounds);
        let safe = p.in_domain(&x)
            && (0..x.len()).all(|i| {
                let mut y = x.clone();
                y[i] += margin;
                let up = p.in_domain(&y);
                y[i] -= 2.0 * margin;
                up && p.in_domain(&y)
            });
        if safe {
            out.push(x);
        }
    }
    out
}

/// `∇Fᵀ Λ ∇H`.
pub fn bracket<P: Bivector, F: SmoothMap, H: SmoothMap>(p: &P, f: &F, h: &H, x: &[f64]) -> f64 {
    let gf = smooth::gradient(f, x);
    let gh = smooth::gradient(h, x);
    let m = p.matrix(x);
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += gf[i] * m[(i, j)] * gh[j];
        }
    }
    s
}

/// `∂Λ/∂x_l` for every `l`.
pub fn matrix_derivatives<P: Bivector>(p: &P, x: &[f64]) -> Vec<DMatrix<f64>> {
    let n = x.len();
    (0..n)
        .map(|l| {
            let xd: Vec<Dual<f64>> = (0..n)
                .map(|i| Dual::new(x[i], if i == l { 1.0 } else { 0.0 }))
                .collect();
            p.matrix(&xd).map(|d| d.eps)
        })
        .collect()
}

/// Largest entry of `Σ_l Λ_il ∂_lΛ_jk + Λ_jl ∂_lΛ_ki + Λ_kl ∂_lΛ_ij` at `x`.
pub fn jacobi_at<P: Bivector>(p: &P, x: &[f64]) -> f64 {
    let n = x.len();
    let m = p.matrix(x);
    let d = matrix_derivatives(p, x);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut s = 0.0;
                for (l, dl) in d.iter().enumerate() {
                    s += m[(i, l)] * dl[(j, k)] + m[(j, l)] * dl[(k, i)] + m[(k, l)] * dl[(i, j)];
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst
}

/// Maximum cyclic Jacobi sum over the sample points.
pub fn jacobi_residual<P: Bivector>(p: &P, points: &[Vec<f64>]) -> f64 {
    points.iter().map(|x| jacobi_at(p, x)).fold(0.0, f64::max)
}

/// Largest entry of `Λ + Λᵀ` over the points.
pub fn antisymmetry_residual<P: Bivector>(p: &P, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let m = p.matrix(x.as_slice());
            linalg::max_abs(&(&m + m.transpose()))
        })
        .fold(0.0, f64::max)
}

/// `‖𝒟ᵀ Λ(F(z), ξ Am(g)) 𝒟 − Λ(z, ξ)‖_F` where `F` is the canonical point map
/// (`g⁻¹·z` for left actions) and `𝒟 = diag(J⁻ᵀ, Am(g)⁻¹)` with `J = ∂F/∂z`.
pub fn canonical_action_residual<A: GroupAction>(
    structure: &ActionPoisson<A>,
    g: &DMatrix<f64>,
    x: &[f64],
) -> Result<f64, ActionError> {
    let action = &structure.action;
    if !action.has_closed_form() {
        return Err(ActionError::NoClosedForm(
            alloc::string::ToString::to_string(action.name()),
        ));
    }
    let (p, r) = (structure.p(), structure.r());
    let (z, xi) = (&x[..p], &x[p..]);
    let fz = action.canonical_point(g, z)?;
    if !action.in_domain(&fz) {
        return Err(ActionError::OutOfDomain);
    }
    let map = PointMap {
        action,
        g: g.clone(),
        canonical: true,
    };
    let jac = smooth::jacobian(&map, z);
    let jinv_t = linalg::inverse(&jac)
        .ok_or(ActionError::SingularJacobian)?
        .transpose();
    let am = action.algebra().adjoint_matrix(g)?;
    let am_inv = linalg::inverse(&am).ok_or(ActionError::SingularJacobian)?;
    let mut xt = fz.clone();
    for j in 0..r {
        xt.push((0..r).map(|i| xi[i] * am[(i, j)]).sum());
    }
    let mut d = DMatrix::zeros(p + r, p + r);
    d.view_mut((0, 0), (p, p)).copy_from(&jinv_t);
    d.view_mut((p, p), (r, r)).copy_from(&am_inv);
    let lhs = d.transpose() * structure.matrix(&xt) * &d;
    Ok(linalg::frobenius(&(lhs - structure.matrix(x))))
}

/// `max |[X_j, X_i]^m|` over the points, where `X = Θ¹ − Θ²` are the
/// difference fields; zero iff the two structures are compatible.
pub fn compatibility_residual<A: GroupAction, B: GroupAction>(
    a: &A,
    b: &B,
    points: &[Vec<f64>],
) -> f64 {
    let pa = ActionPoisson { action: a };
    let pb = ActionPoisson { action: b };
    let pdim = a.dim();
    assert_eq!(
        pdim,
        b.dim(),
        "compatibility: patches of different dimension"
    );
    let mut worst: f64 = 0.0;
    for z in points {
        let z = &z[..pdim];
        let diff = pa.theta(z) - pb.theta(z);
        let ddiff: Vec<DMatrix<f64>> = (0..pdim)
            .map(|l| {
                let zd: Vec<Dual<f64>> = (0..pdim)
                    .map(|i| Dual::new(z[i], if i == l { 1.0 } else { 0.0 }))
                    .collect();
                (pa.theta(&zd) - pb.theta(&zd)).map(|d| d.eps)
            })
            .collect();
        let r = diff.ncols();
        for i in 0..r {
            for j in 0..r {
                for m in 0..pdim {
                    let mut s = 0.0f64;
                    for (l, dl) in ddiff.iter().enumerate() {
                        s += diff[(l, j)] * dl[(m, i)] - diff[(l, i)] * dl[(m, j)];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

impl<A: GroupAction> ActionPoisson<A> {
    /// Sample `(z, ξ)` with `z` from the action's own sampler.
    pub fn sample(&self, rng: &mut SampleRng) -> Vec<f64> {
        let mut x = sample_point(&self.action, rng);
        for _ in 0..self.r() {
            x.push(sample::uniform(rng, -2.0, 2.0));
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::expr::{var, ExprMap};

    #[test]
    fn projective_block_matrix() {
        let p = assemble(Action::catalog("sl2-projective").unwrap());
        let (u, x1, x2, x3) = (0.6, 1.0, -2.0, 0.5);
        let m = p.matrix(&[u, x1, x2, x3]);
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0,
                2.0 * u,
                1.0,
                -u * u, //
                -2.0 * u,
                0.0,
                2.0 * x2,
                -2.0 * x3, //
                -1.0,
                -2.0 * x2,
                0.0,
                x1, //
                u * u,
                2.0 * x3,
                -x1,
                0.0,
            ],
        );
        assert!(linalg::max_abs(&(m - want)) < 1e-15);
    }

    #[test]
    fn darboux_for_translations() {
        let p = assemble(Action::catalog("translation-2").unwrap());
        let m = p.matrix(&[0.1, 0.2, 0.3, 0.4]);
        let mut want = DMatrix::zeros(4, 4);
        want[(0, 2)] = 1.0;
        want[(1, 3)] = 1.0;
        want[(2, 0)] = -1.0;
        want[(3, 1)] = -1.0;
        assert_eq!(m, want);
        assert_eq!(jacobi_residual(&p, &sample_points(&p, 5, 1)), 0.0);
        let z = ExprMap::scalar(4, var(0));
        let xi = ExprMap::scalar(4, var(2));
        assert_eq!(bracket(&p, &z, &xi, &[0.1, 0.2, 0.3, 0.4]), 1.0);
    }

    #[test]
    fn xi_brackets_are_the_algebra_bracket() {
        let p = assemble(Action::catalog("sl2-projective").unwrap());
        let x = [0.3, 1.5, -0.5, 2.0];
        let f = ExprMap::scalar(4, var(1));
        let h = ExprMap::scalar(4, var(2));
        assert!((bracket(&p, &f, &h, &x) - 2.0 * x[2]).abs() < 1e-15);
        assert_eq!(bracket(&p, &f, &f, &x), 0.0);
    }

    #[test]
    fn jacobi_positive_and_negative() {
        let good = assemble(Action::catalog("sl2-projective").unwrap());
        let pts = sample_points(&good, 20, 2);
        assert!(jacobi_residual(&good, &pts) < 1e-12);
        let bad = assemble(Action::lookup("sl2-projective-corrupted").unwrap());
        assert!(jacobi_residual(&bad, &pts) > 1e-3);
    }

    #[test]
    fn canonical_projective_and_se2() {
        let mut rng = sample::rng(9);
        for name in [
            "sl2-projective",
            "se2-linear",
            "sl2-tangent",
            "se2-linear-right",
        ] {
            let p = assemble(Action::catalog(name).unwrap());
            for _ in 0..10 {
                let x = p.sample(&mut rng);
                let g = sample::group_element(&mut rng, p.action.algebra(), 0.5);
                let res = canonical_action_residual(&p, &g, &x).unwrap();
                assert!(res < 1e-10, "{name}: {res}");
            }
        }
    }

    #[test]
    fn compatibility_of_affine_pair() {
        let a = Action::catalog("aff2-linear").unwrap();
        let b = Action::catalog("aff2-affine").unwrap();
        let pts = algebroid_points(&a);
        assert!(compatibility_residual(&a, &b, &pts) < 1e-12);
        assert_eq!(compatibility_residual(&a, &a, &pts), 0.0);
        let pa = assemble(a.clone());
        let pb = assemble(b.clone());
        for k in [0.0, 0.5, 1.0, 2.0] {
            let pen = pencil(&pa, &pb, k);
            let pts = sample_points(&pen, 10, 4);
            assert!(jacobi_residual(&pen, &pts) < 1e-12);
        }
        let p = Action::catalog("sl2-projective").unwrap();
        let t = Action::catalog("sl2-trivial").unwrap();
        assert!(compatibility_residual(&p, &t, &algebroid_points(&p)) > 1e-3);
        let pen = pencil(assemble(p), assemble(t), 0.5);
        assert!(jacobi_residual(&pen, &sample_points(&pen, 10, 4)) > 1e-3);
    }

    fn algebroid_points<A: GroupAction>(a: &A) -> Vec<Vec<f64>> {
        crate::algebroid::sample_points(a, 10, 8)
    }

    #[test]
    fn semidirect_matches_contragredient() {
        let sl2 = crate::lie::sl2();
        let lp = semidirect_lie_poisson(&sl2).unwrap();
        let ap = assemble(Action::catalog("contragredient(sl2)").unwrap());
        let pts = sample_points(&ap, 20, 6);
        for x in &pts {
            let d = lp.matrix(x.as_slice()) - ap.matrix(x.as_slice());
            assert!(linalg::max_abs(&d) < 1e-14);
        }
        let (x, y) = (pts[0][0], pts[0][1]);
        let m = ap.matrix(&pts[0]);
        assert_eq!(m[(0, 2)], -x);
        assert_eq!(m[(0, 4)], -y);
        assert_eq!(m[(1, 2)], y);
        assert_eq!(m[(1, 3)], -x);
    }
}
