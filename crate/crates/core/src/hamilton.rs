//! Hamiltonian flows `ẋ = Λ(x)∇H(x)` by classical RK4, conservation
//! monitoring and the ξ-freezing check for invariant Hamiltonians.

use alloc::boxed::Box;
use alloc::vec::Vec;

use thiserror::Error;

use crate::action::{sample_point, ActionError, GroupAction};
use crate::expr::{c, var, Expr, ExprMap};
use crate::poisson::{ActionPoisson, Bivector};
use crate::sample;
use crate::smooth::{self, SmoothMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("step size must be positive and finite")]
    InvalidStep,
    #[error("state has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial state is outside the domain")]
    OutOfDomain,
    #[error("trajectory left the domain at t = {t}")]
    DomainExit { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("Hamiltonian is not invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error(transparent)]
    Action(#[from] ActionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub integrator: &'static str,
    pub dt: f64,
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

/// `Λ(x)∇H(x)`.
pub fn hamiltonian_field<P: Bivector, H: SmoothMap>(p: &P, h: &H, x: &[f64]) -> Vec<f64> {
    let grad = smooth::gradient(h, x);
    let m = p.matrix(x);
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * grad[j]).sum())
        .collect()
}

pub fn rk4_step<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], dt: f64) -> Vec<f64> {
    let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(u, v)| u + s * v).collect()
    };
    let k1 = f(x);
    let k2 = f(&axpy(x, &k1, 0.5 * dt));
    let k3 = f(&axpy(x, &k2, 0.5 * dt));
    let k4 = f(&axpy(x, &k3, dt));
    (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn step_count(t_end: f64, dt: f64) -> Result<usize, FlowError> {
    if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(FlowError::InvalidStep);
    }
    Ok(num_traits::Float::ceil(t_end / dt - 1e-9).max(0.0) as usize)
}

/// Fixed-step RK4 for an arbitrary field. `project` is applied after every
/// step; `guard` rejects states outside the domain.
pub fn integrate<F, G, Q>(
    field: F,
    init: &[f64],
    t_end: f64,
    dt: f64,
    guard: G,
    mut project: Q,
) -> Result<Trajectory, FlowError>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> bool,
    Q: FnMut(&mut Vec<f64>),
{
    let steps = step_count(t_end, dt)?;
    if !guard(init) {
        return Err(FlowError::OutOfDomain);
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(init.to_vec());
    let mut x = init.to_vec();
    for n in 0..steps {
        let t0 = n as f64 * dt;
        let h = dt.min(t_end - t0);
        x = rk4_step(&field, &x, h);
        project(&mut x);
        let t = t0 + h;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::NonFinite { t });
        }
        if !guard(&x) {
            return Err(FlowError::DomainExit { t });
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory {
        times,
        states,
        integrator: "rk4",
        dt,
        seed: None,
    })
}

pub fn flow<P: Bivector, H: SmoothMap>(
    p: &P,
    h: &H,
    init: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, FlowError> {
    if init.len() != p.dim() || h.dim_in() != p.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: p.dim(),
            got: init.len().min(h.dim_in()),
        });
    }
    integrate(
        |x| hamiltonian_field(p, h, x),
        init,
        t_end,
        dt,
        |x| p.in_domain(x),
        |_| {},
    )
}

/// `max_t |F(x(t)) − F(x(0))|`.
pub fn conserved_monitor<F: SmoothMap>(traj: &Trajectory, f: &F) -> f64 {
    let Some(first) = traj.states.first() else {
        return 0.0;
    };
    let f0 = smooth::value(f, first);
    traj.states
        .iter()
        .map(|x| (smooth::value(f, x) - f0).abs())
        .fold(0.0, f64::max)
}

/// Drifts of `H` at `dt` and `dt/2` and their ratio; about 16 for RK4.
pub fn drift_order<P: Bivector, H: SmoothMap>(
    p: &P,
    h: &H,
    init: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<(f64, f64, f64), FlowError> {
    let coarse = conserved_monitor(&flow(p, h, init, t_end, dt)?, h);
    let fine = conserved_monitor(&flow(p, h, init, t_end, dt / 2.0)?, h);
    Ok((coarse, fine, coarse / fine))
}

/// `max |H(F(z), ξ Am(g)) − H(z, ξ)|` over random `g`, `z`, `ξ`, with `F` the
/// canonical point map of the action.
pub fn invariance_residual<A: GroupAction, H: SmoothMap>(
    action: &A,
    h: &H,
    samples: usize,
    seed: u64,
) -> Result<f64, ActionError> {
    let mut rng = sample::rng(seed);
    let alg = action.algebra();
    let r = alg.dim();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut tries = 0;
    while done < samples && tries < 20 * samples {
        tries += 1;
        let g = sample::group_element(&mut rng, alg, 0.5);
        let z = sample_point(action, &mut rng);
        let xi: Vec<f64> = (0..r)
            .map(|_| sample::uniform(&mut rng, -2.0, 2.0))
            .collect();
        let fz = action.canonical_point(&g, &z)?;
        if !action.in_domain(&fz) {
            continue;
        }
        let am = alg.adjoint_matrix(&g)?;
        let mut x = z.clone();
        x.extend_from_slice(&xi);
        let mut y = fz;
        y.extend((0..r).map(|j| (0..r).map(|i| xi[i] * am[(i, j)]).sum::<f64>()));
        let (h0, h1) = (smooth::value(h, &x), smooth::value(h, &y));
        worst = worst.max((h1 - h0).abs() / h0.abs().max(1.0));
        done += 1;
    }
    Ok(worst)
}

/// The `ξ` block of the Hamiltonian field, `−Φᵀ∇_z H + Λ(g*)∇_ξ H` up to parity.
pub fn xi_rate<A: GroupAction, H: SmoothMap>(
    structure: &ActionPoisson<A>,
    h: &H,
    x: &[f64],
) -> Vec<f64> {
    let p = structure.p();
    hamiltonian_field(structure, h, x).split_off(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreezeReport {
    pub invariance: f64,
    pub max_xi_rate: f64,
    pub h_drift: f64,
    pub steps: usize,
}

pub const INVARIANCE_TOL: f64 = 1e-8;

/// Pre-checks invariance of `H`, then integrates and records `max ‖ξ̇‖`
/// pointwise along the trajectory.
pub fn xi_freeze_check<A: GroupAction, H: SmoothMap>(
    action: &A,
    h: &H,
    init: &[f64],
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<FreezeReport, FlowError> {
    let invariance = invariance_residual(action, h, 64, seed)?;
    if !(invariance < INVARIANCE_TOL) {
        return Err(FlowError::NotInvariant {
            residual: invariance,
        });
    }
    let structure = ActionPoisson { action };
    let traj = flow(&structure, h, init, t_end, dt)?;
    let max_xi_rate = traj
        .states
        .iter()
        .map(|x| {
            num_traits::Float::sqrt(xi_rate(&structure, h, x).iter().map(|v| v * v).sum::<f64>())
        })
        .fold(0.0, f64::max);
    Ok(FreezeReport {
        invariance,
        max_xi_rate,
        h_drift: conserved_monitor(&traj, h),
        steps: traj.len() - 1,
    })
}

fn sq(e: Expr) -> Expr {
    Expr::Powi(Box::new(e), 2)
}

/// Named Hamiltonians. Coordinates are `(z…, ξ…)`.
pub mod presets {
    use super::*;

    /// `(x² + y²)/5 + 2ξ₁² − ξ₂² + 3ξ₃²` on `(x, y, ξ)`.
    pub fn mobius_energy() -> ExprMap {
        let e = c(0.2) * (sq(var(0)) + sq(var(1))) + c(2.0) * sq(var(2)) - sq(var(3))
            + c(3.0) * sq(var(4));
        ExprMap::scalar(5, e)
    }

    /// `2ξ₁² − ξ₂² + 3ξ₃²` on `ξ` alone.
    pub fn so3_quadratic() -> ExprMap {
        ExprMap::scalar(3, c(2.0) * sq(var(0)) - sq(var(1)) + c(3.0) * sq(var(2)))
    }

    /// `2ξ₁ξ₂ − ξ₃³` on `ξ` alone.
    pub fn so3_cubic() -> ExprMap {
        ExprMap::scalar(
            3,
            c(2.0) * var(0) * var(1) - Expr::Powi(Box::new(var(2)), 3),
        )
    }

    /// `4ξ₁² + ξ₂ξ₃` on `(u, v, ξ)`.
    pub fn kappa1() -> ExprMap {
        ExprMap::scalar(5, c(4.0) * sq(var(2)) + var(3) * var(4))
    }

    /// `(u²ξ₂ − uξ₁ − ξ₃)/v` on `(u, v, ξ)`.
    pub fn kappa2() -> ExprMap {
        ExprMap::scalar(5, (sq(var(0)) * var(3) - var(0) * var(2) - var(4)) / var(1))
    }

    /// Quadratic Casimir `ξ₁² + 4ξ₂ξ₃` of `sl(2)*` on `(u, v, ξ)`.
    pub fn sl2_casimir() -> ExprMap {
        ExprMap::scalar(5, sq(var(2)) + c(4.0) * var(3) * var(4))
    }

    /// `κ₂ + 0.1 C` with `C` the quadratic Casimir.
    pub fn invariant_pair() -> ExprMap {
        let k2 = kappa2().exprs.remove(0);
        let cas = sl2_casimir().exprs.remove(0);
        ExprMap::scalar(5, k2 + c(0.1) * cas)
    }

    /// `κ₂ + 0.1 κ₁`.
    pub fn kappa_pair() -> ExprMap {
        let k2 = kappa2().exprs.remove(0);
        let k1 = kappa1().exprs.remove(0);
        ExprMap::scalar(5, k2 + c(0.1) * k1)
    }

    /// `(u² + u_v² + u_vv²)/5 + |ξ|²` on a jet of order `order ≥ 2`.
    pub fn jet_energy(order: usize) -> ExprMap {
        let p = order + 1;
        let e = c(0.2) * (sq(var(0)) + sq(var(1)) + sq(var(2)))
            + sq(var(p))
            + sq(var(p + 1))
            + sq(var(p + 2));
        ExprMap::scalar(p + 3, e)
    }

    /// `½(z² + ξ²)` on the Darboux plane.
    pub fn oscillator() -> ExprMap {
        ExprMap::scalar(2, c(0.5) * (sq(var(0)) + sq(var(1))))
    }
}

/// `H(z, ξ)` with the `ξ` arguments ignored, i.e. a function pulled back
/// from `M`; used for the `H ≡ const` and `H = H(z)` cases.
pub fn constant_hamiltonian(dim: usize, value: f64) -> ExprMap {
    ExprMap::scalar(dim, c(value))
}

pub fn stationary(traj: &Trajectory) -> f64 {
    let x0 = &traj.states[0];
    traj.states
        .iter()
        .flat_map(|x| x.iter().zip(x0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}
