//! Lie group actions on coordinate patches and their matrices of infinitesimals.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::lie::{self, LieAlgebra, LieError};
use crate::linalg;
use crate::sample::{self, SampleRng};
use crate::scalar::{Dual, Jet, Scalar};
use crate::smooth::{self, SmoothMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Left,
    Right,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Left => 1.0,
            Parity::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("point is outside the domain of the action")]
    OutOfDomain,
    #[error("action `{0}` is known only through its infinitesimals")]
    NoClosedForm(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("Jacobian of the action is singular")]
    SingularJacobian,
    #[error("prolongation needs an invariant independent variable")]
    UnsupportedShape,
    #[error(
        "group law fails for `{name}` (identity {identity:.3e}, composition {composition:.3e})"
    )]
    GroupLaw {
        name: String,
        identity: f64,
        composition: f64,
    },
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A smooth action of a matrix group on a `p`-dimensional coordinate patch.
pub trait GroupAction {
    fn name(&self) -> &str;
    fn algebra(&self) -> &LieAlgebra;
    /// Dimension `p` of the patch.
    fn dim(&self) -> usize;

    fn parity(&self) -> Parity {
        Parity::Left
    }

    /// `g · z`.
    fn act<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError>;

    /// `p × r` matrix of infinitesimals, column `k` being `d/dt|₀ exp(t v_k)·z`.
    fn infinitesimals<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, ActionError> {
        phi_by_duals(self.algebra(), self.dim(), z, |g, zd| self.act(g, zd))
    }

    fn in_domain(&self, _z: &[f64]) -> bool {
        true
    }

    /// Whether `act` is available (otherwise only `infinitesimals` is).
    fn has_closed_form(&self) -> bool {
        true
    }

    /// Box from which sample points are drawn.
    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-2.0, 2.0); self.dim()]
    }

    /// The point map of the canonical action: `g⁻¹·z` for left actions and
    /// `z·g` for right actions.
    fn canonical_point<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        match self.parity() {
            Parity::Left => {
                let gi = linalg::inverse(g).ok_or(ActionError::SingularJacobian)?;
                self.act(&gi, z)
            }
            Parity::Right => self.act(g, z),
        }
    }
}

impl<A: GroupAction> GroupAction for &A {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn algebra(&self) -> &LieAlgebra {
        (**self).algebra()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn parity(&self) -> Parity {
        (**self).parity()
    }
    fn act<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        (**self).act(g, z)
    }
    fn infinitesimals<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, ActionError> {
        (**self).infinitesimals(z)
    }
    fn in_domain(&self, z: &[f64]) -> bool {
        (**self).in_domain(z)
    }
    fn has_closed_form(&self) -> bool {
        (**self).has_closed_form()
    }
    fn sample_box(&self) -> Vec<(f64, f64)> {
        (**self).sample_box()
    }
}

/// Infinitesimals evaluated at a real point with domain checking.
pub fn infinitesimal_matrix<A: GroupAction>(
    action: &A,
    z: &[f64],
) -> Result<DMatrix<f64>, ActionError> {
    if !action.in_domain(z) {
        return Err(ActionError::OutOfDomain);
    }
    action.infinitesimals(z)
}

/// Draw a point of the patch that is inside the domain guard.
pub fn sample_point<A: GroupAction>(action: &A, rng: &mut SampleRng) -> Vec<f64> {
    let bounds = action.sample_box();
    loop {
        let z = sample::in_box(rng, &bounds);
        if action.in_domain(&z) {
            return z;
        }
    }
}

/// The point map `z ↦ g·z` as a [`SmoothMap`] in `z` for fixed real `g`.
pub struct PointMap<'a, A> {
    pub action: &'a A,
    pub g: DMatrix<f64>,
    pub canonical: bool,
}

impl<A: GroupAction> SmoothMap for PointMap<'_, A> {
    fn dim_in(&self) -> usize {
        self.action.dim()
    }
    fn dim_out(&self) -> usize {
        self.action.dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let g = linalg::lift_matrix::<S>(&self.g);
        let out = if self.canonical {
            self.action.canonical_point(&g, z)
        } else {
            self.action.act(&g, z)
        };
        out.unwrap_or_else(|_| vec![S::from_f64(f64::NAN); z.len()])
    }
}

/// `‖J⁻¹ Φ(F(z)) − Φ(z) Am(g)‖_F` with `F` the canonical point map and `J = ∂F/∂z`.
pub fn equivariance_residual<A: GroupAction>(
    action: &A,
    g: &DMatrix<f64>,
    z: &[f64],
) -> Result<f64, ActionError> {
    if !action.has_closed_form() {
        return Err(ActionError::NoClosedForm(action.name().to_string()));
    }
    if !action.in_domain(z) {
        return Err(ActionError::OutOfDomain);
    }
    let map = PointMap {
        action,
        g: g.clone(),
        canonical: true,
    };
    let fz = action.canonical_point(g, z)?;
    if !action.in_domain(&fz) || fz.iter().any(|v| !v.is_finite()) {
        return Err(ActionError::OutOfDomain);
    }
    let jac = smooth::jacobian(&map, z);
    let lhs = linalg::solve(&jac, &action.infinitesimals(&fz)?, 1e-12)
        .ok_or(ActionError::SingularJacobian)?;
    let am = action.algebra().adjoint_matrix(g)?;
    let rhs = action.infinitesimals(z)? * am;
    Ok(linalg::frobenius(&(lhs - rhs)))
}

/// Identity and composition residuals of the group law at `z`.
pub fn group_law_residuals<A: GroupAction>(
    action: &A,
    g: &DMatrix<f64>,
    h: &DMatrix<f64>,
    z: &[f64],
) -> Result<(f64, f64), ActionError> {
    let n = g.nrows();
    let e = DMatrix::identity(n, n);
    let id = action.act(&e, z)?;
    let identity = id
        .iter()
        .zip(z)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gz = action.act(g, z)?;
    let hgz = action.act(h, &gz)?;
    let prod = match action.parity() {
        Parity::Left => h * g,
        Parity::Right => g * h,
    };
    let direct = action.act(&prod, z)?;
    let composition = hgz
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((identity, composition))
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Sl2Projective,
    Sl2Tangent,
    Sl2Circle,
    Se2Linear,
    So3Linear,
    So3Mobius,
    Translation(usize),
    TranslationLine,
    Aff2Linear,
    Aff2Affine,
    Contragredient,
    Trivial(usize),
}

/// A catalog action.
#[derive(Debug, Clone)]
pub struct Action {
    name: String,
    kind: Kind,
    alg: LieAlgebra,
    parity: Parity,
    /// Amplitude of the `z₁²` perturbation added to the first column of `Φ`.
    corruption: f64,
}

pub const CATALOG: &[&str] = &[
    "sl2-projective",
    "sl2-tangent",
    "sl2-circle",
    "sl2-trivial",
    "se2-linear",
    "so3-linear",
    "so3-mobius",
    "translation-<r>",
    "translation-line",
    "aff2-linear",
    "aff2-affine",
    "contragredient(<algebra>)",
    "trivial(<algebra>,<p>)",
];

impl Action {
    fn new(name: &str, kind: Kind, alg: LieAlgebra) -> Self {
        Action {
            name: name.to_string(),
            kind,
            alg,
            parity: Parity::Left,
            corruption: 0.0,
        }
    }

    /// Look up a catalog action without validating the group law.
    pub fn lookup(name: &str) -> Result<Action, ActionError> {
        let name = name.trim();
        if let Some(base) = name.strip_suffix("-right") {
            return Ok(Action::lookup(base)?.into_right());
        }
        if let Some(base) = name.strip_suffix("-corrupted") {
            return Ok(Action::lookup(base)?.corrupted(0.5));
        }
        let a = match name {
            "sl2-projective" => Action::new(name, Kind::Sl2Projective, lie::sl2()),
            "sl2-tangent" => Action::new(name, Kind::Sl2Tangent, lie::sl2()),
            "sl2-circle" => Action::new(name, Kind::Sl2Circle, lie::sl2()),
            "sl2-trivial" => Action::new(name, Kind::Trivial(1), lie::sl2()),
            "se2-linear" => Action::new(name, Kind::Se2Linear, lie::se2()),
            "so3-linear" => Action::new(name, Kind::So3Linear, lie::so3()),
            "so3-mobius" => Action::new(name, Kind::So3Mobius, lie::so3e()),
            "translation-line" => Action::new(name, Kind::TranslationLine, lie::line()),
            "aff2-linear" => Action::new(name, Kind::Aff2Linear, lie::aff2()),
            "aff2-affine" => Action::new(name, Kind::Aff2Affine, lie::aff2()),
            _ => {
                if let Some(r) = name
                    .strip_prefix("translation-")
                    .and_then(|s| s.parse::<usize>().ok())
                {
                    if r == 0 {
                        return Err(ActionError::UnknownAction(name.to_string()));
                    }
                    Action::new(name, Kind::Translation(r), lie::translation(r))
                } else if let Some(inner) = name
                    .strip_prefix("contragredient(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    Action::new(name, Kind::Contragredient, lie::algebra(inner)?)
                } else if let Some(inner) = name
                    .strip_prefix("trivial(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    let (alg, p) = inner
                        .rsplit_once(',')
                        .ok_or_else(|| ActionError::UnknownAction(name.to_string()))?;
                    let p: usize = p
                        .trim()
                        .parse()
                        .map_err(|_| ActionError::UnknownAction(name.to_string()))?;
                    Action::new(name, Kind::Trivial(p), lie::algebra(alg)?)
                } else {
                    return Err(ActionError::UnknownAction(name.to_string()));
                }
            }
        };
        Ok(a)
    }

    /// Look up a catalog action and certify identity and composition on samples.
    pub fn catalog(name: &str) -> Result<Action, ActionError> {
        let a = Action::lookup(name)?;
        a.validate(8, 0x5eed)?;
        Ok(a)
    }

    /// Check `e·z = z` and the composition law on random samples.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<(f64, f64), ActionError> {
        if !self.has_closed_form() {
            return Ok((0.0, 0.0));
        }
        let mut rng = sample::rng(seed);
        let (mut wi, mut wc) = (0.0f64, 0.0f64);
        let mut done = 0;
        let mut attempts = 0;
        while done < samples && attempts < 50 * samples {
            attempts += 1;
            let z = sample_point(self, &mut rng);
            let g = sample::group_element(&mut rng, &self.alg, 0.5);
            let h = sample::group_element(&mut rng, &self.alg, 0.5);
            match group_law_residuals(self, &g, &h, &z) {
                Ok((i, c)) => {
                    wi = wi.max(i);
                    wc = wc.max(c);
                    done += 1;
                }
                Err(ActionError::OutOfDomain) => continue,
                Err(e) => return Err(e),
            }
        }
        if wi > 1e-12 || wc > 1e-9 {
            return Err(ActionError::GroupLaw {
                name: self.name.clone(),
                identity: wi,
                composition: wc,
            });
        }
        Ok((wi, wc))
    }

    /// The right action `z·g := g⁻¹·z`.
    pub fn into_right(mut self) -> Action {
        self.parity = match self.parity {
            Parity::Left => Parity::Right,
            Parity::Right => Parity::Left,
        };
        self.name = format!("{}-right", self.name);
        self
    }

    /// A copy whose infinitesimals carry an extra `amp·z₁²` in the first
    /// column; it no longer comes from any action.
    pub fn corrupted(mut self, amp: f64) -> Action {
        self.corruption = amp;
        self.name = format!("{}-corrupted", self.name);
        self
    }

    fn act_parity<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        match self.parity {
            Parity::Left => self.act_left(g, z),
            Parity::Right => {
                let gi = linalg::inverse(g).ok_or(ActionError::SingularJacobian)?;
                self.act_left(&gi, z)
            }
        }
    }

    fn act_left<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        let tiny = 1e-8;
        match &self.kind {
            Kind::Sl2Projective | Kind::Sl2Tangent => {
                let den = g[(1, 0)] * z[0] + g[(1, 1)];
                if den.re().abs() < tiny {
                    return Err(ActionError::OutOfDomain);
                }
                let u = (g[(0, 0)] * z[0] + g[(0, 1)]) / den;
                if self.kind == Kind::Sl2Tangent {
                    Ok(vec![u, z[1] / (den * den)])
                } else {
                    Ok(vec![u])
                }
            }
            Kind::Sl2Circle => {
                let half = z[0].scale(0.5);
                let (sn, cs) = (half.sin(), half.cos());
                let y = g[(0, 0)] * sn + g[(0, 1)] * cs;
                let x = g[(1, 0)] * sn + g[(1, 1)] * cs;
                Ok(vec![y.atan2(x).scale(2.0)])
            }
            Kind::Se2Linear | Kind::Aff2Affine => Ok(vec![
                g[(0, 0)] * z[0] + g[(0, 1)] * z[1] + g[(0, 2)],
                g[(1, 0)] * z[0] + g[(1, 1)] * z[1] + g[(1, 2)],
            ]),
            Kind::Aff2Linear => Ok(vec![g[(0, 0)] * z[0] + g[(0, 1)] * z[1], z[1]]),
            Kind::So3Linear => Ok((0..3)
                .map(|i| (0..3).fold(S::zero(), |acc, j| acc + g[(i, j)] * z[j]))
                .collect()),
            Kind::So3Mobius => Err(ActionError::NoClosedForm(self.name.clone())),
            Kind::Translation(r) => Ok((0..*r).map(|i| z[i] + g[(i, *r)]).collect()),
            Kind::TranslationLine => {
                if g[(0, 0)].re() <= 0.0 {
                    return Err(ActionError::OutOfDomain);
                }
                Ok(vec![z[0] + g[(0, 0)].ln()])
            }
            Kind::Contragredient => {
                let gi = linalg::inverse(g).ok_or(ActionError::SingularJacobian)?;
                let n = z.len();
                Ok((0..n)
                    .map(|i| (0..n).fold(S::zero(), |acc, j| acc + gi[(j, i)] * z[j]))
                    .collect())
            }
            Kind::Trivial(_) => Ok(z.to_vec()),
        }
    }

    /// The infinitesimals `X₁ = y∂ₓ − x∂ᵧ`, `X₂ = ½(1+x²−y²)∂ₓ + xy∂ᵧ`,
    /// `X₃ = xy∂ₓ + ½(1−x²+y²)∂ᵧ`.
    fn mobius_phi<S: Scalar>(z: &[S]) -> DMatrix<S> {
        let (x, y) = (z[0], z[1]);
        let half = S::from_f64(0.5);
        let one = S::one();
        DMatrix::from_row_slice(
            2,
            3,
            &[
                y,
                half * (one + x * x - y * y),
                x * y,
                -x,
                x * y,
                half * (one - x * x + y * y),
            ],
        )
    }
}

impl GroupAction for Action {
    fn name(&self) -> &str {
        &self.name
    }

    fn algebra(&self) -> &LieAlgebra {
        &self.alg
    }

    fn dim(&self) -> usize {
        match &self.kind {
            Kind::Sl2Projective | Kind::Sl2Circle | Kind::TranslationLine => 1,
            Kind::Sl2Tangent
            | Kind::Se2Linear
            | Kind::So3Mobius
            | Kind::Aff2Linear
            | Kind::Aff2Affine => 2,
            Kind::So3Linear => 3,
            Kind::Translation(r) => *r,
            Kind::Contragredient => self.alg.rep_dim(),
            Kind::Trivial(p) => *p,
        }
    }

    fn parity(&self) -> Parity {
        self.parity
    }

    fn act<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        if self.corruption != 0.0 {
            return Err(ActionError::NoClosedForm(self.name.clone()));
        }
        self.act_parity(g, z)
    }

    fn infinitesimals<S: Scalar>(&self, z: &[S]) -> Result<DMatrix<S>, ActionError> {
        let mut phi = if self.kind == Kind::So3Mobius {
            let phi = Action::mobius_phi(z);
            match self.parity {
                Parity::Left => phi,
                Parity::Right => -phi,
            }
        } else {
            phi_by_duals(&self.alg, self.dim(), z, |g, zd| self.act_parity(g, zd))?
        };
        if self.corruption != 0.0 {
            phi[(0, 0)] += (z[0] * z[0]).scale(self.corruption);
        }
        Ok(phi)
    }

    fn in_domain(&self, z: &[f64]) -> bool {
        if z.len() != self.dim() || z.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            Kind::Sl2Tangent => z[1].abs() > 1e-3,
            _ => true,
        }
    }

    fn has_closed_form(&self) -> bool {
        self.kind != Kind::So3Mobius && self.corruption == 0.0
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        match self.kind {
            Kind::Sl2Tangent => vec![(-2.0, 2.0), (0.5, 2.0)],
            Kind::Sl2Circle => vec![(-3.0, 3.0)],
            Kind::So3Mobius => vec![(-1.5, 1.5); 2],
            _ => vec![(-2.0, 2.0); self.dim()],
        }
    }
}

/// `Φ` from one dual pass per basis element through `g = e + ε v_k`.
pub fn phi_by_duals<S, F>(
    alg: &LieAlgebra,
    p: usize,
    z: &[S],
    act: F,
) -> Result<DMatrix<S>, ActionError>
where
    S: Scalar,
    F: Fn(&DMatrix<Dual<S>>, &[Dual<S>]) -> Result<Vec<Dual<S>>, ActionError>,
{
    let (n, r) = (alg.rep_dim(), alg.dim());
    let zd: Vec<Dual<S>> = z.iter().map(|&v| Dual::constant(v)).collect();
    let mut phi = DMatrix::<S>::zeros(p, r);
    for (k, v) in alg.basis().iter().enumerate() {
        let g = DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { S::one() } else { S::zero() };
            Dual::new(id, S::from_f64(v[(i, j)]))
        });
        let out = act(&g, &zd)?;
        for (l, o) in out.iter().enumerate() {
            phi[(l, k)] = o.eps;
        }
    }
    Ok(phi)
}

/// Jet prolongation of an action on one dependent variable `u` over an
/// invariant independent variable `v`, acting on `(u, u_v, …, u_{(N)})`.
#[derive(Debug, Clone)]
pub struct Prolonged<A> {
    base: A,
    order: usize,
    name: String,
    /// Value of `v` at which the jet is taken (only matters when the base
    /// action on `(v, u)` depends on `v`).
    v_ref: f64,
}

impl<A: GroupAction> Prolonged<A> {
    pub fn new(base: A, order: usize) -> Result<Self, ActionError> {
        if order == 0 || order >= crate::scalar::JET_LEN || !(base.dim() == 1 || base.dim() == 2) {
            return Err(ActionError::UnsupportedShape);
        }
        if !base.has_closed_form() {
            return Err(ActionError::NoClosedForm(base.name().to_string()));
        }
        let name = format!("{}^({})", base.name(), order);
        let p = Prolonged {
            base,
            order,
            name,
            v_ref: 0.0,
        };
        if p.base.dim() == 2 {
            // v must be invariant: probe with a generic group element.
            let mut rng = sample::rng(7);
            let g = sample::group_element(&mut rng, p.base.algebra(), 0.4);
            let z = sample_point(&p.base, &mut rng);
            let out = p.base.act(&g, &z)?;
            if (out[0] - z[0]).abs() > 1e-12 {
                return Err(ActionError::UnsupportedShape);
            }
        }
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &A {
        &self.base
    }
}

impl<A: GroupAction> GroupAction for Prolonged<A> {
    fn name(&self) -> &str {
        &self.name
    }
    fn algebra(&self) -> &LieAlgebra {
        self.base.algebra()
    }
    fn dim(&self) -> usize {
        self.order + 1
    }
    fn parity(&self) -> Parity {
        self.base.parity()
    }

    fn act<S: Scalar>(&self, g: &DMatrix<S>, z: &[S]) -> Result<Vec<S>, ActionError> {
        let mut coeffs = [S::zero(); crate::scalar::JET_LEN];
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            coeffs[k] = z[k].scale(1.0 / fact);
        }
        let u = Jet::from_coeffs(&coeffs[..=self.order]);
        let gj = g.map(Jet::constant);
        let out = if self.base.dim() == 1 {
            self.base.act(&gj, &[u])?[0]
        } else {
            let v = Jet::variable(S::from_f64(self.v_ref));
            let out = self.base.act(&gj, &[v, u])?;
            let dv = out[0] - v;
            if dv.c.iter().any(|c| c.re().abs() > 1e-12) {
                return Err(ActionError::UnsupportedShape);
            }
            out[1]
        };
        Ok((0..=self.order)
            .map(|k| out.derivative_at_zero(k))
            .collect())
    }

    fn in_domain(&self, z: &[f64]) -> bool {
        z.len() == self.dim()
            && z.iter().all(|v| v.is_finite())
            && if self.base.dim() == 1 {
                self.base.in_domain(&z[..1])
            } else {
                self.base.in_domain(&[self.v_ref, z[0]])
            }
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(-1.5, 1.5); self.dim()];
        if self.dim() > 1 {
            b[1] = (0.5, 2.0);
        }
        b
    }
}
