//! Moving frames for free and regular left actions, and the Hamiltonian
//! flow written in frame-adapted coordinates.
//!
//! The frame `σ(z)` solves `(σ(z)·z)_i = c_i` on a chosen set of coordinate
//! indices. Newton's method runs on the group itself: near `w = σ·z` the
//! update `σ ← exp(δ)σ` moves `w` by `Φ(w)δ`, so no chart on `G` is needed.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::action::{ActionError, GroupAction, Parity};
use crate::hamilton::{integrate, FlowError, Trajectory};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::poisson::Bivector;
use crate::scalar::Scalar;
use crate::smooth::SmoothMap;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("normalization equations are singular (action not free and regular here)")]
    NotFreeRegular,
    #[error("Newton iteration for the frame did not converge (residual {0:.3e})")]
    NoConvergence(f64),
    #[error("frames are implemented for left actions only")]
    RightAction,
    #[error("need {expected} normalization equations, got {got}")]
    Normalization { expected: usize, got: usize },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone)]
pub struct MovingFrame<A> {
    pub action: A,
    /// Coordinates fixed by the normalization equations.
    pub indices: Vec<usize>,
    pub targets: Vec<f64>,
    closed_form: Option<fn(&[f64]) -> Option<DMatrix<f64>>>,
}

/// The `SL(2)` frame on `(u, u_v, u_vv, …)` normalizing to `(0, 1, 0)`,
/// defined for `u_v > 0`.
pub fn sl2_jet_frame(z: &[f64]) -> Option<DMatrix<f64>> {
    let (u, u1, u2) = (z[0], z[1], z[2]);
    if !(u1 > 0.0) {
        return None;
    }
    let s = u1.sqrt();
    let a = 1.0 / s;
    let b = -u / s;
    let c = u2 / (2.0 * u1 * s);
    let d = (1.0 + b * c) / a;
    Some(DMatrix::from_row_slice(2, 2, &[a, b, c, d]))
}

pub fn moving_frame<A: GroupAction>(
    action: A,
    indices: Vec<usize>,
    targets: Vec<f64>,
) -> Result<MovingFrame<A>, FrameError> {
    if action.parity() == Parity::Right {
        return Err(FrameError::RightAction);
    }
    let r = action.algebra().dim();
    if indices.len() != r || targets.len() != r {
        return Err(FrameError::Normalization {
            expected: r,
            got: indices.len().min(targets.len()),
        });
    }
    Ok(MovingFrame {
        action,
        indices,
        targets,
        closed_form: None,
    })
}

/// The jet-space frame for the prolonged projective `SL(2)` action, with
/// normalization `u = 0, u_v = 1, u_vv = 0` and its closed form.
pub fn sl2_prolonged_frame<A: GroupAction>(action: A) -> Result<MovingFrame<A>, FrameError> {
    if action.algebra().name() != "sl2" || action.dim() < 3 {
        return Err(FrameError::Action(ActionError::UnsupportedShape));
    }
    let mut f = moving_frame(action, alloc::vec![0, 1, 2], alloc::vec![0.0, 1.0, 0.0])?;
    f.closed_form = Some(sl2_jet_frame);
    Ok(f)
}

impl<A: GroupAction> MovingFrame<A> {
    fn normalization_residual(&self, w: &[f64]) -> Vec<f64> {
        self.indices
            .iter()
            .zip(&self.targets)
            .map(|(&i, &t)| w[i] - t)
            .collect()
    }

    /// `σ(z)`: the closed form when one is registered, otherwise Newton.
    pub fn sigma(&self, z: &[f64]) -> Result<DMatrix<f64>, FrameError> {
        if !self.action.in_domain(z) {
            return Err(FrameError::Action(ActionError::OutOfDomain));
        }
        match self.closed_form {
            Some(f) => f(z).ok_or(FrameError::Action(ActionError::OutOfDomain)),
            None => self.sigma_newton(z),
        }
    }

    pub fn sigma_newton(&self, z: &[f64]) -> Result<DMatrix<f64>, FrameError> {
        let alg = self.action.algebra();
        let r = alg.dim();
        let n = alg.rep_dim();
        let mut sigma = DMatrix::<f64>::identity(n, n);
        let mut w = z.to_vec();
        let mut res = self.normalization_residual(&w);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..60 {
            if norm(&res) < 1e-14 {
                return Ok(sigma);
            }
            let phi = self.action.infinitesimals(&w)?;
            let jac = DMatrix::from_fn(r, r, |i, k| phi[(self.indices[i], k)]);
            let rhs = DMatrix::from_fn(r, 1, |i, _| -res[i]);
            let delta = linalg::solve(&jac, &rhs, 1e-12).ok_or(FrameError::NotFreeRegular)?;
            let delta: Vec<f64> = delta.iter().copied().collect();
            let mut step = 1.0;
            loop {
                let cand = alg.exp(&delta, step) * &sigma;
                if let Ok(cw) = self.action.act(&cand, z) {
                    if self.action.in_domain(&cw) {
                        let cres = self.normalization_residual(&cw);
                        if norm(&cres) < norm(&res) || step < 1e-3 {
                            sigma = cand;
                            w = cw;
                            res = cres;
                            break;
                        }
                    }
                }
                step *= 0.5;
                if step < 1e-4 {
                    return Err(FrameError::NoConvergence(norm(&res)));
                }
            }
        }
        if norm(&res) < 1e-11 {
            Ok(sigma)
        } else {
            Err(FrameError::NoConvergence(norm(&res)))
        }
    }

    /// `I(z) = σ(z)·z`.
    pub fn invariants(&self, z: &[f64]) -> Result<Vec<f64>, FrameError> {
        let s = self.sigma(z)?;
        Ok(self.action.act(&s, z)?)
    }

    /// `‖σ(g·z) − σ(z)g⁻¹‖`.
    pub fn equivariance_residual(&self, g: &DMatrix<f64>, z: &[f64]) -> Result<f64, FrameError> {
        let gz = self.action.act(g, z)?;
        let lhs = self.sigma(&gz)?;
        let gi = linalg::inverse(g).ok_or(FrameError::Action(ActionError::SingularJacobian))?;
        Ok(linalg::max_abs(&(lhs - self.sigma(z)? * gi)))
    }
}

/// `Λ = [[0, Φ_σ], [−Φ_σᵀ, Λ(sl(2)*)]]` on `(σ^a, σ^b, σ^c, ξ)`, where column
/// `k` of `Φ_σ` holds the chart coordinates of `−σ v_k` and
/// `σ^d = (1 + σ^b σ^c)/σ^a`.
#[derive(Debug, Clone)]
pub struct Sl2FrameStructure {
    pub alg: LieAlgebra,
}

impl Default for Sl2FrameStructure {
    fn default() -> Self {
        Sl2FrameStructure {
            alg: crate::lie::sl2(),
        }
    }
}

/// `σ` from the chart `(σ^a, σ^b, σ^c)`.
pub fn sl2_from_chart<S: Scalar>(c: &[S]) -> DMatrix<S> {
    let d = (S::one() + c[1] * c[2]) / c[0];
    DMatrix::from_row_slice(2, 2, &[c[0], c[1], c[2], d])
}

impl Bivector for Sl2FrameStructure {
    fn dim(&self) -> usize {
        6
    }

    fn matrix<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        let sigma = sl2_from_chart(&x[..3]);
        let mut m = DMatrix::<S>::zeros(6, 6);
        for (k, v) in self.alg.basis().iter().enumerate() {
            let col = -(&sigma * linalg::lift_matrix::<S>(v));
            let chart = [col[(0, 0)], col[(0, 1)], col[(1, 0)]];
            for (i, &ci) in chart.iter().enumerate() {
                m[(i, 3 + k)] = ci;
                m[(3 + k, i)] = -ci;
            }
        }
        m.view_mut((3, 3), (3, 3))
            .copy_from(&self.alg.lie_poisson(&x[3..]));
        m
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x[0].abs() > 1e-8
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        alloc::vec![
            (0.5, 2.0),
            (-2.0, 2.0),
            (-2.0, 2.0),
            (-2.0, 2.0),
            (-2.0, 2.0),
            (-2.0, 2.0)
        ]
    }
}

/// `H` pulled back to frame coordinates: `(σ, ξ) ↦ H(σ⁻¹·k, ξ)` for a fixed
/// cross-section point `k`. `σ` is passed as its `n²` row-major entries.
pub struct FrameHamiltonian<'a, A, H> {
    pub action: &'a A,
    pub h: &'a H,
    pub k: Vec<f64>,
}

impl<A: GroupAction, H: SmoothMap> SmoothMap for FrameHamiltonian<'_, A, H> {
    fn dim_in(&self) -> usize {
        let n = self.action.algebra().rep_dim();
        n * n + self.action.algebra().dim()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.action.algebra().rep_dim();
        let sigma = DMatrix::from_row_slice(n, n, &x[..n * n]);
        let Some(si) = linalg::inverse(&sigma) else {
            return alloc::vec![S::from_f64(f64::NAN)];
        };
        let k: Vec<S> = self.k.iter().map(|&v| S::from_f64(v)).collect();
        let Ok(mut z) = self.action.act(&si, &k) else {
            return alloc::vec![S::from_f64(f64::NAN)];
        };
        z.extend_from_slice(&x[n * n..]);
        self.h.eval(&z)
    }
}

/// Trajectory in frame coordinates together with the fixed invariants.
#[derive(Debug, Clone)]
pub struct FrameTrajectory {
    /// States `(σ entries row-major, ξ)`.
    pub traj: Trajectory,
    pub invariants: Vec<f64>,
    pub rep_dim: usize,
    pub max_det_drift: f64,
}

impl FrameTrajectory {
    pub fn sigma(&self, i: usize) -> DMatrix<f64> {
        let n = self.rep_dim;
        DMatrix::from_row_slice(n, n, &self.traj.states[i][..n * n])
    }

    pub fn xi(&self, i: usize) -> &[f64] {
        &self.traj.states[i][self.rep_dim * self.rep_dim..]
    }

    /// `(z, ξ)` with `z = σ⁻¹·I`.
    pub fn point<A: GroupAction>(&self, action: &A, i: usize) -> Result<Vec<f64>, FrameError> {
        let si = linalg::inverse(&self.sigma(i))
            .ok_or(FrameError::Action(ActionError::SingularJacobian))?;
        let mut z = action.act(&si, &self.invariants)?;
        z.extend_from_slice(self.xi(i));
        Ok(z)
    }
}

/// Integrates `σ̇ = −σ Σ H_{ξ_k} v_k`, `ξ̇_k = D_σH[σ v_k] + (Λ(g*)∇_ξH)_k`
/// from the frame of `(z₀, ξ₀)`. `σ` is projected back to `det σ = 1` after
/// every step when the algebra is traceless.
pub fn frame_flow<A: GroupAction, H: SmoothMap>(
    frame: &MovingFrame<A>,
    h: &H,
    init: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<FrameTrajectory, FrameError> {
    let action = &frame.action;
    let alg = action.algebra();
    let (p, r, n) = (action.dim(), alg.dim(), alg.rep_dim());
    if init.len() != p + r {
        return Err(FrameError::Action(ActionError::UnsupportedShape));
    }
    let sigma0 = frame.sigma(&init[..p])?;
    let k = action.act(&sigma0, &init[..p])?;
    let hf = FrameHamiltonian {
        action,
        h,
        k: k.clone(),
    };
    let unimodular = alg.basis().iter().all(|v| v.trace().abs() < 1e-12);
    let basis: Vec<DMatrix<f64>> = alg.basis().to_vec();

    let field = |x: &[f64]| -> Vec<f64> {
        let sigma = DMatrix::from_row_slice(n, n, &x[..n * n]);
        let mut out = alloc::vec![0.0; n * n + r];
        // ∇_ξ H and the σ-directional derivatives, one dual pass each
        let mut h_xi = alloc::vec![0.0; r];
        let mut dir = alloc::vec![0.0; n * n + r];
        for j in 0..r {
            dir[n * n + j] = 1.0;
            h_xi[j] = crate::smooth::directional(&hf, x, &dir).1[0];
            dir[n * n + j] = 0.0;
        }
        let mut xmat = DMatrix::<f64>::zeros(n, n);
        for (j, v) in basis.iter().enumerate() {
            xmat += v * h_xi[j];
        }
        let sdot = -(&sigma * xmat);
        out[..n * n].copy_from_slice(&sdot.transpose().as_slice()[..n * n]);
        let lp = alg.lie_poisson(&x[n * n..]);
        for (kk, v) in basis.iter().enumerate() {
            let sv = &sigma * v;
            let mut d = alloc::vec![0.0; n * n + r];
            for i in 0..n {
                for j in 0..n {
                    d[i * n + j] = sv[(i, j)];
                }
            }
            let ds = crate::smooth::directional(&hf, x, &d).1[0];
            let lam: f64 = (0..r).map(|j| lp[(kk, j)] * h_xi[j]).sum();
            out[n * n + kk] = ds + lam;
        }
        out
    };

    let mut x0: Vec<f64> = Vec::with_capacity(n * n + r);
    for i in 0..n {
        for j in 0..n {
            x0.push(sigma0[(i, j)]);
        }
    }
    x0.extend_from_slice(&init[p..]);
    let mut max_det_drift: f64 = 0.0;
    let project = |x: &mut Vec<f64>| {
        let sigma = DMatrix::from_row_slice(n, n, &x[..n * n]);
        let det = linalg::determinant(&sigma);
        if unimodular && det > 0.0 {
            let s = num_traits::Float::powf(det, -1.0 / n as f64);
            for v in &mut x[..n * n] {
                *v *= s;
            }
        }
        let after = linalg::determinant(&DMatrix::from_row_slice(n, n, &x[..n * n]));
        max_det_drift = max_det_drift.max((after - 1.0).abs());
    };
    let guard =
        |x: &[f64]| linalg::determinant(&DMatrix::from_row_slice(n, n, &x[..n * n])).abs() > 1e-10;
    let traj = integrate(field, &x0, t_end, dt, guard, project)?;
    Ok(FrameTrajectory {
        traj,
        invariants: k,
        rep_dim: n,
        max_det_drift,
    })
}

/// The frame Hamiltonian of the `SL(2)` example written directly in the
/// chart `(σ^a, σ^b, σ^c, ξ)`.
pub fn sl2_frame_hamiltonian() -> crate::expr::ExprMap {
    use crate::expr::{c, var, Expr};
    use alloc::boxed::Box;
    let p = |e: Expr, k: i32| Expr::Powi(Box::new(e), k);
    let e = c(0.2)
        * (p(var(0), -4) + p(var(1), 2) / p(var(0), 2) + c(4.0) * p(var(2), 2) / p(var(0), 6))
        + p(var(3), 2)
        + p(var(4), 2)
        + p(var(5), 2);
    crate::expr::ExprMap::scalar(6, e)
}

impl<A: GroupAction> MovingFrame<A> {
    /// Matrix `σ` as a chart triple when the group is `SL(2)`.
    pub fn chart(sigma: &DMatrix<f64>) -> [f64; 3] {
        [sigma[(0, 0)], sigma[(0, 1)], sigma[(1, 0)]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{Action, Prolonged};
    use crate::hamilton::{self, presets};
    use crate::poisson::{self, ActionPoisson};
    use crate::sample;
    use crate::smooth;

    fn jet_action(order: usize) -> Prolonged<Action> {
        Prolonged::new(Action::catalog("sl2-projective").unwrap(), order).unwrap()
    }

    #[test]
    fn closed_form_at_unit_jets() {
        let f = sl2_prolonged_frame(jet_action(2)).unwrap();
        let s = f.sigma(&[1.0, 1.0, 1.0]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.5, 0.5]);
        assert!(linalg::max_abs(&(s - want)) < 1e-15);
        let on = f.sigma(&[0.0, 1.0, 0.0]).unwrap();
        assert!(linalg::max_abs(&(on - DMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn newton_matches_closed_form() {
        let f = sl2_prolonged_frame(jet_action(3)).unwrap();
        let mut rng = sample::rng(11);
        for _ in 0..20 {
            let z = sample::in_box(
                &mut rng,
                &[(-1.0, 1.0), (0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0)],
            );
            let a = f.sigma(&z).unwrap();
            let b = f.sigma_newton(&z).unwrap();
            assert!(linalg::max_abs(&(&a - &b)) < 1e-10, "{z:?}");
            let w = f.invariants(&z).unwrap();
            assert!(w[0].abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12 && w[2].abs() < 1e-12);
            let g = sample::group_element(&mut rng, f.action.algebra(), 0.4);
            assert!(f.equivariance_residual(&g, &z).unwrap() < 1e-10);
            assert!((linalg::determinant(&a) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn frame_structure_matches_closed_form() {
        let s = Sl2FrameStructure::default();
        let pts = poisson::sample_points(&s, 20, 4);
        for x in &pts {
            let (a, b, c, x1, x2, x3) = (x[0], x[1], x[2], x[3], x[4], x[5]);
            let d = (1.0 + b * c) / a;
            #[rustfmt::skip]
            let want = DMatrix::from_row_slice(6, 6, &[
                0.0, 0.0, 0.0, -a, 0.0, -b,
                0.0, 0.0, 0.0, b, -a, 0.0,
                0.0, 0.0, 0.0, -c, 0.0, -d,
                a, -b, c, 0.0, 2.0 * x2, -2.0 * x3,
                0.0, a, 0.0, -2.0 * x2, 0.0, x1,
                b, 0.0, d, 2.0 * x3, -x1, 0.0,
            ]);
            assert!(linalg::max_abs(&(s.matrix(x) - want)) < 1e-12);
        }
        assert!(poisson::jacobi_residual(&s, &pts) < 1e-10);
    }

    #[test]
    fn frame_hamiltonian_matches_chart_formula() {
        let a = jet_action(2);
        let h = presets::jet_energy(2);
        let hf = FrameHamiltonian {
            action: &a,
            h: &h,
            k: alloc::vec![0.0, 1.0, 0.0],
        };
        let chart = sl2_frame_hamiltonian();
        let mut rng = sample::rng(5);
        for _ in 0..10 {
            let c3 = sample::in_box(&mut rng, &[(0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0)]);
            let xi = sample::in_box(&mut rng, &[(-1.0, 1.0); 3]);
            let s = sl2_from_chart(&c3);
            let mut x: Vec<f64> = s.transpose().as_slice().to_vec();
            x.extend_from_slice(&xi);
            let mut y = c3.clone();
            y.extend_from_slice(&xi);
            assert!((smooth::value(&hf, &x) - smooth::value(&chart, &y)).abs() < 1e-12);
        }
    }

    #[test]
    fn xi_free_hamiltonian_keeps_sigma() {
        let f = sl2_prolonged_frame(jet_action(2)).unwrap();
        let h = crate::expr::ExprMap::scalar(6, crate::expr::var(0) * crate::expr::var(0));
        let ft = frame_flow(&f, &h, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 0.5, 1e-2).unwrap();
        assert!(linalg::max_abs(&(ft.sigma(ft.traj.len() - 1) - ft.sigma(0))) < 1e-14);
    }

    #[test]
    fn frame_flow_agrees_with_full_flow() {
        let f = sl2_prolonged_frame(jet_action(2)).unwrap();
        let h = presets::jet_energy(2);
        let init = [1.0; 6];
        let ft = frame_flow(&f, &h, &init, 1.0, 1e-3).unwrap();
        let full = hamilton::flow(
            &ActionPoisson {
                action: jet_action(2),
            },
            &h,
            &init,
            1.0,
            1e-3,
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for i in (0..full.len()).step_by(50) {
            let back = ft.point(&f.action, i).unwrap();
            worst = back
                .iter()
                .zip(&full.states[i])
                .map(|(a, b)| (a - b).abs())
                .fold(worst, f64::max);
        }
        assert!(worst < 1e-5, "{worst:e}");
        assert!(ft.max_det_drift < 1e-12);
        // chart form of the same system
        let chart = Sl2FrameStructure::default();
        let mut y0 = MovingFrame::<Prolonged<Action>>::chart(&ft.sigma(0)).to_vec();
        y0.extend_from_slice(&init[3..]);
        let ct = hamilton::flow(&chart, &sl2_frame_hamiltonian(), &y0, 1.0, 1e-3).unwrap();
        let end = MovingFrame::<Prolonged<Action>>::chart(&ft.sigma(ft.traj.len() - 1));
        for i in 0..3 {
            assert!((ct.last()[i] - end[i]).abs() < 1e-8);
        }
    }
}
