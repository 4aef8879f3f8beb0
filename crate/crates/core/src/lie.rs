//! Matrix Lie algebras: bases, structure constants, Adjoint matrices and the
//! Lie–Poisson bivector on the dual.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;
use crate::scalar::Scalar;

const SPAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("basis is empty")]
    EmptyBasis,
    #[error("basis matrices are linearly dependent")]
    DependentBasis,
    #[error("[v{i}, v{j}] is not in the span of the basis (residual {residual:.3e})")]
    NotClosed { i: usize, j: usize, residual: f64 },
    #[error("g v{i} g^-1 is not in the span of the basis (residual {residual:.3e})")]
    NotInSpan { i: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),
}

/// A finite-dimensional matrix Lie algebra with a fixed ordered basis.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    name: String,
    n: usize,
    basis: Vec<DMatrix<f64>>,
    /// `c[(k * r + i) * r + j]` with `[v_i, v_j] = Σ_k c^k_ij v_k`.
    c: Vec<f64>,
    /// Least-squares projector onto basis coordinates, `r × n²`.
    proj: DMatrix<f64>,
}

fn commutator<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> DMatrix<S> {
    a * b - b * a
}

impl LieAlgebra {
    /// Build the algebra from its basis, extracting structure constants by
    /// least squares on the flattened commutators.
    pub fn from_basis(name: &str, basis: Vec<DMatrix<f64>>) -> Result<Self, LieError> {
        let r = basis.len();
        if r == 0 {
            return Err(LieError::EmptyBasis);
        }
        let n = basis[0].nrows();
        for b in &basis {
            if b.nrows() != n || b.ncols() != n {
                return Err(LieError::DimensionMismatch {
                    expected: n,
                    got: b.nrows(),
                });
            }
        }
        let nn = n * n;
        let mut bm = DMatrix::<f64>::zeros(nn, r);
        for (k, b) in basis.iter().enumerate() {
            for (idx, v) in b.iter().enumerate() {
                bm[(idx, k)] = *v;
            }
        }
        let gram = bm.transpose() * &bm;
        let scale = gram.diagonal().max().max(1.0);
        let proj =
            linalg::solve(&gram, &bm.transpose(), 1e-12 * scale).ok_or(LieError::DependentBasis)?;
        // Reject near-dependence that slipped past pivoting.
        let recon = &proj * &bm;
        if linalg::max_abs(&(recon - DMatrix::identity(r, r))) > 1e-8 {
            return Err(LieError::DependentBasis);
        }
        let mut alg = LieAlgebra {
            name: name.to_string(),
            n,
            basis,
            c: vec![0.0; r * r * r],
            proj,
        };
        for i in 0..r {
            for j in 0..r {
                let m = commutator(&alg.basis[i], &alg.basis[j]);
                let (coef, residual) = alg.decompose(&m);
                if residual > SPAN_TOL * (1.0 + linalg::frobenius(&m)) {
                    return Err(LieError::NotClosed { i, j, residual });
                }
                for (k, ck) in coef.into_iter().enumerate() {
                    alg.c[(k * r + i) * r + j] = if ck.abs() < 1e-14 { 0.0 } else { ck };
                }
            }
        }
        Ok(alg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Algebra dimension `r`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size `n` of the representing matrices.
    pub fn rep_dim(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    /// Structure constant `c^k_ij`.
    #[inline]
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        let r = self.dim();
        self.c[(k * r + i) * r + j]
    }

    /// Coordinates of `m` in the basis and the Frobenius residual of the fit.
    pub fn decompose(&self, m: &DMatrix<f64>) -> (Vec<f64>, f64) {
        let coef = self.coords(m);
        let back = self.element(&coef);
        (coef, linalg::frobenius(&(m - back)))
    }

    /// Least-squares basis coordinates of a matrix.
    pub fn coords<S: Scalar>(&self, m: &DMatrix<S>) -> Vec<S> {
        let r = self.dim();
        let mut out = vec![S::zero(); r];
        for (k, o) in out.iter_mut().enumerate() {
            for (idx, v) in m.iter().enumerate() {
                let p = self.proj[(k, idx)];
                if p != 0.0 {
                    *o += v.scale(p);
                }
            }
        }
        out
    }

    /// `Σ x_k v_k` as a matrix.
    pub fn element<S: Scalar>(&self, x: &[S]) -> DMatrix<S> {
        let mut m = DMatrix::<S>::zeros(self.n, self.n);
        for (xk, b) in x.iter().zip(&self.basis) {
            for (dst, v) in m.iter_mut().zip(b.iter()) {
                if *v != 0.0 {
                    *dst += xk.scale(*v);
                }
            }
        }
        m
    }

    /// Coefficients of `[x, y]` from the structure constants.
    pub fn bracket<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let r = self.dim();
        let mut out = vec![S::zero(); r];
        for i in 0..r {
            for j in 0..r {
                let xy = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(k, i, j);
                    if c != 0.0 {
                        *o += xy.scale(c);
                    }
                }
            }
        }
        out
    }

    /// `Λ(g*)(ξ)_ij = Σ_k c^k_ij ξ_k`.
    pub fn lie_poisson<S: Scalar>(&self, xi: &[S]) -> DMatrix<S> {
        let r = self.dim();
        assert_eq!(xi.len(), r, "lie_poisson: ξ has wrong length");
        let mut m = DMatrix::<S>::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                let mut acc = S::zero();
                for (k, x) in xi.iter().enumerate() {
                    let c = self.c(k, i, j);
                    if c != 0.0 {
                        acc += x.scale(c);
                    }
                }
                m[(i, j)] = acc;
            }
        }
        m
    }

    pub fn lie_poisson_checked(&self, xi: &[f64]) -> Result<DMatrix<f64>, LieError> {
        if xi.len() != self.dim() {
            return Err(LieError::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        Ok(self.lie_poisson(xi))
    }

    /// Matrix of infinitesimals of `ξ ↦ ξ Am(g)`: the negated Lie–Poisson matrix.
    pub fn coadjoint_infinitesimal(&self, xi: &[f64]) -> Result<DMatrix<f64>, LieError> {
        Ok(-self.lie_poisson_checked(xi)?)
    }

    /// `ad(x)` in the basis: column `j` holds the coordinates of `[x, v_j]`.
    pub fn ad_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let r = self.dim();
        DMatrix::from_fn(r, r, |k, j| (0..r).map(|i| x[i] * self.c(k, i, j)).sum())
    }

    /// `Am(g)` with `g v_i g⁻¹ = Σ_k v_k Am(g)_{ki}`.
    pub fn adjoint_matrix(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>, LieError> {
        let ginv = linalg::inverse(g).ok_or(LieError::NotInSpan {
            i: 0,
            residual: f64::INFINITY,
        })?;
        let r = self.dim();
        let mut am = DMatrix::zeros(r, r);
        for (i, v) in self.basis.iter().enumerate() {
            let conj = g * v * &ginv;
            let (coef, residual) = self.decompose(&conj);
            if residual > SPAN_TOL * (1.0 + linalg::frobenius(&conj)) {
                return Err(LieError::NotInSpan { i, residual });
            }
            for (k, ck) in coef.into_iter().enumerate() {
                am[(k, i)] = ck;
            }
        }
        Ok(am)
    }

    /// `exp(t Σ x_k v_k)`.
    pub fn exp(&self, x: &[f64], t: f64) -> DMatrix<f64> {
        let m = self.element(x) * t;
        linalg::expm(&m)
    }

    /// Trace form `K_ij = tr(v_i v_j)`.
    pub fn trace_gram(&self) -> DMatrix<f64> {
        let r = self.dim();
        DMatrix::from_fn(r, r, |i, j| (&self.basis[i] * &self.basis[j]).trace())
    }

    /// Largest `‖[v_i,v_j] − Σ_k c^k_ij v_k‖_F` over the basis.
    pub fn closure_residual(&self) -> f64 {
        let r = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let m = commutator(&self.basis[i], &self.basis[j]);
                let coef: Vec<f64> = (0..r).map(|k| self.c(k, i, j)).collect();
                worst = worst.max(linalg::frobenius(&(m - self.element(&coef))));
            }
        }
        worst
    }

    /// Largest entry of the cyclic Jacobi sum on structure constants.
    pub fn jacobi_residual(&self) -> f64 {
        let r = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let mut s = 0.0;
                        for m in 0..r {
                            s += self.c(m, i, j) * self.c(l, m, k)
                                + self.c(m, j, k) * self.c(l, m, i)
                                + self.c(m, k, i) * self.c(l, m, j);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|c^k_ij + c^k_ji|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let r = self.dim();
        let mut worst: f64 = 0.0;
        for k in 0..r {
            for i in 0..r {
                for j in 0..r {
                    worst = worst.max((self.c(k, i, j) + self.c(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// The algebra of `G ⋉ Rⁿ` in `gl(n+1)`, basis ordered `w_1..w_n, v̄_1..v̄_r`.
    pub fn semidirect(&self) -> Result<LieAlgebra, LieError> {
        let n = self.n;
        let mut basis = Vec::with_capacity(n + self.dim());
        for j in 0..n {
            let mut w = DMatrix::zeros(n + 1, n + 1);
            w[(j, n)] = 1.0;
            basis.push(w);
        }
        for v in &self.basis {
            let mut vb = DMatrix::zeros(n + 1, n + 1);
            vb.view_mut((0, 0), (n, n)).copy_from(v);
            basis.push(vb);
        }
        LieAlgebra::from_basis(&format!("semidirect({},{})", self.name, n), basis)
    }

    /// Whether `g` satisfies the defining constraints of the catalog group.
    pub fn group_constraint_residual(&self, g: &DMatrix<f64>) -> f64 {
        match self.name.as_str() {
            "sl2" => (g.determinant() - 1.0).abs(),
            "so3" | "so3e" => {
                let n = g.nrows();
                linalg::max_abs(&(g.transpose() * g - DMatrix::identity(n, n)))
            }
            _ => {
                if g.determinant().abs() > 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

fn m(n: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, entries)
}

fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(n, n);
    e[(i, j)] = 1.0;
    e
}

/// sl(2) with `v_a = diag(1,−1)`, `v_b = E12`, `v_c = E21`.
pub fn sl2() -> LieAlgebra {
    LieAlgebra::from_basis(
        "sl2",
        vec![m(2, &[1.0, 0.0, 0.0, -1.0]), unit(2, 0, 1), unit(2, 1, 0)],
    )
    .unwrap()
}

/// se(2) with `v_θ`, `v_a`, `v_b` in homogeneous 3×3 form.
pub fn se2() -> LieAlgebra {
    LieAlgebra::from_basis(
        "se2",
        vec![
            m(3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            unit(3, 0, 2),
            unit(3, 1, 2),
        ],
    )
    .unwrap()
}

/// so(3) with `v_xy`, `v_yz`, `v_zx`.
pub fn so3() -> LieAlgebra {
    LieAlgebra::from_basis(
        "so3",
        vec![
            m(3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            m(3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
            m(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
        ],
    )
    .unwrap()
}

/// so(3) with `(v_i)_jk = ε_ijk`, so that `[v_i, v_j] = −ε_ijk v_k`.
pub fn so3e() -> LieAlgebra {
    LieAlgebra::from_basis(
        "so3e",
        vec![
            m(3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]),
            m(3, &[0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            m(3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ],
    )
    .unwrap()
}

/// Translations of Rʳ as nilpotent `(r+1)×(r+1)` matrices.
pub fn translation(r: usize) -> LieAlgebra {
    let basis = (0..r).map(|i| unit(r + 1, i, r)).collect();
    LieAlgebra::from_basis(&format!("translation({r})"), basis).unwrap()
}

/// The affine group `[[e^λ, μ, ε], [0, 1, δ], [0, 0, 1]]`, basis `E11, E12, E13, E23`.
pub fn aff2() -> LieAlgebra {
    LieAlgebra::from_basis(
        "aff2",
        vec![unit(3, 0, 0), unit(3, 0, 1), unit(3, 0, 2), unit(3, 1, 2)],
    )
    .unwrap()
}

/// The one-dimensional algebra spanned by `[[1]]`.
pub fn line() -> LieAlgebra {
    LieAlgebra::from_basis("line", vec![m(1, &[1.0])]).unwrap()
}

/// Two commuting diagonal generators.
pub fn abelian2() -> LieAlgebra {
    LieAlgebra::from_basis(
        "abelian2",
        vec![m(2, &[1.0, 0.0, 0.0, 0.0]), m(2, &[0.0, 0.0, 0.0, 1.0])],
    )
    .unwrap()
}

fn parse_args<'a>(name: &'a str, head: &str) -> Option<Vec<&'a str>> {
    let rest = name.strip_prefix(head)?;
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

/// Look up a catalog algebra by name.
pub fn algebra(name: &str) -> Result<LieAlgebra, LieError> {
    let name = name.trim();
    match name {
        "sl2" => return Ok(sl2()),
        "se2" => return Ok(se2()),
        "so3" => return Ok(so3()),
        "so3e" => return Ok(so3e()),
        "aff2" => return Ok(aff2()),
        "line" => return Ok(line()),
        "abelian2" => return Ok(abelian2()),
        _ => {}
    }
    let unknown = || LieError::UnknownAlgebra(name.to_string());
    if let Some(args) = parse_args(name, "translation") {
        let r: usize = args
            .first()
            .and_then(|a| a.parse().ok())
            .filter(|&r| r > 0)
            .ok_or_else(unknown)?;
        return Ok(translation(r));
    }
    if let Some(r) = name
        .strip_prefix("translation-")
        .and_then(|a| a.parse::<usize>().ok())
    {
        if r > 0 {
            return Ok(translation(r));
        }
    }
    if let Some(args) = parse_args(name, "semidirect") {
        if args.len() == 2 {
            let base = algebra(args[0])?;
            let n: usize = args[1].parse().map_err(|_| unknown())?;
            if n != base.rep_dim() {
                return Err(LieError::DimensionMismatch {
                    expected: base.rep_dim(),
                    got: n,
                });
            }
            return base.semidirect();
        }
    }
    Err(unknown())
}

pub const CATALOG: &[&str] = &[
    "sl2",
    "se2",
    "so3",
    "so3e",
    "aff2",
    "line",
    "abelian2",
    "translation(r)",
    "semidirect(g,n)",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_bracket_table() {
        let g = sl2();
        assert_eq!(g.c(1, 0, 1), 2.0);
        assert_eq!(g.c(0, 1, 2), 1.0);
        assert_eq!(g.c(2, 0, 2), -2.0);
        assert!(g.closure_residual() < 1e-12);
    }

    #[test]
    fn abelian_constants_vanish() {
        let g = abelian2();
        assert!(g.c.iter().all(|&c| c == 0.0));
        assert!(linalg::max_abs(&g.lie_poisson(&[1.3, -0.2])) == 0.0);
    }

    #[test]
    fn so3_constants_match_commutators() {
        let g = so3();
        for i in 0..3 {
            for j in 0..3 {
                let m = commutator(&g.basis()[i], &g.basis()[j]);
                let coef = g.coords(&m);
                for k in 0..3 {
                    assert!((coef[k] - g.c(k, i, j)).abs() < 1e-14);
                }
            }
        }
        assert_eq!(g.c(2, 0, 1), 1.0);
    }

    #[test]
    fn sl2_lie_poisson_matrix() {
        let g = sl2();
        let lp = g.lie_poisson(&[1.0, 2.0, 3.0]);
        let want = m(3, &[0.0, 4.0, -6.0, -4.0, 0.0, 1.0, 6.0, -1.0, 0.0]);
        assert_eq!(lp, want);
    }

    #[test]
    fn sl2_coadjoint_infinitesimal_at_first_axis() {
        let got = sl2().coadjoint_infinitesimal(&[1.0, 0.0, 0.0]).unwrap();
        let want = -m(3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        assert_eq!(got, want);
    }

    #[test]
    fn sl2_adjoint_closed_form() {
        let g = sl2();
        let (a, b, c) = (1.3, -0.4, 0.25);
        let d = (1.0 + b * c) / a;
        let gm = m(2, &[a, b, c, d]);
        let am = g.adjoint_matrix(&gm).unwrap();
        let want = m(
            3,
            &[
                a * d + b * c,
                -a * c,
                d * b,
                -2.0 * a * b,
                a * a,
                -b * b,
                2.0 * c * d,
                -c * c,
                d * d,
            ],
        );
        assert!(linalg::max_abs(&(am - want)) < 1e-13);
        let diag = g.adjoint_matrix(&m(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        assert!(
            linalg::max_abs(&(diag - m(3, &[1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.25])))
                < 1e-14
        );
    }

    #[test]
    fn wrong_group_is_not_in_span() {
        let s = so3();
        let shear = m(3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            s.adjoint_matrix(&shear),
            Err(LieError::NotInSpan { .. })
        ));
    }

    #[test]
    fn dependent_or_open_basis_is_rejected() {
        let b = vec![unit(2, 0, 1), unit(2, 0, 1)];
        assert_eq!(
            LieAlgebra::from_basis("bad", b).unwrap_err(),
            LieError::DependentBasis
        );
        let b = vec![unit(2, 0, 1), unit(2, 1, 0)];
        assert!(matches!(
            LieAlgebra::from_basis("bad", b),
            Err(LieError::NotClosed { .. })
        ));
    }

    #[test]
    fn exp_of_nilpotent_and_diagonal() {
        let g = sl2();
        let e = g.exp(&[0.0, 1.0, 0.0], 1.0);
        assert_eq!(e, m(2, &[1.0, 1.0, 0.0, 1.0]));
        let t = 0.6;
        let e = g.exp(&[1.0, 0.0, 0.0], t);
        assert!(
            (e[(0, 0)] / t.exp() - 1.0).abs() < 1e-14
                && (e[(1, 1)] / (-t).exp() - 1.0).abs() < 1e-14
        );
    }

    #[test]
    fn catalog_names() {
        assert_eq!(algebra("translation(3)").unwrap().dim(), 3);
        assert_eq!(algebra("translation-2").unwrap().dim(), 2);
        let sd = algebra("semidirect(sl2,2)").unwrap();
        assert_eq!(sd.dim(), 5);
        assert!(sd.jacobi_residual() < 1e-14);
        assert!(matches!(algebra("e8"), Err(LieError::UnknownAlgebra(_))));
        assert!(algebra("semidirect(sl2,3)").is_err());
    }
}
