use algpois_core::action::{group_law_residuals, sample_point, Action, GroupAction, Prolonged};
use algpois_core::algebroid::{self, polynomial_section};
use algpois_core::expr::{c, var, Expr, ExprMap};
use algpois_core::hamilton;
use algpois_core::lie;
use algpois_core::linalg;
use algpois_core::loopext::{Derivative, LoopGrid};
use algpois_core::poisson::{self, assemble};
use algpois_core::sample;
use algpois_core::scalar::{Dual, Scalar};
use algpois_core::smooth::{self, SmoothMap};
use algpois_core::stargroup::{associativity_residual, ExpSection};
use nalgebra::DMatrix;
use proptest::prelude::*;

const ALGEBRAS: &[&str] = &[
    "sl2",
    "se2",
    "so3",
    "so3e",
    "aff2",
    "abelian2",
    "translation(3)",
];
const ACTIONS: &[&str] = &[
    "sl2-projective",
    "sl2-tangent",
    "sl2-circle",
    "se2-linear",
    "so3-linear",
    "so3-mobius",
    "translation-2",
    "aff2-linear",
    "aff2-affine",
    "sl2-projective-right",
    "contragredient(so3)",
];

fn closed_form_actions() -> impl Strategy<Value = Action> {
    prop::sample::select(ACTIONS)
        .prop_map(|n| Action::lookup(n).unwrap())
        .prop_filter("closed form", |a| a.has_closed_form())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lie_poisson_transforms_by_adjoint(name in prop::sample::select(ALGEBRAS), seed in any::<u64>()) {
        let alg = lie::algebra(name).unwrap();
        let mut rng = sample::rng(seed);
        let g = sample::group_element(&mut rng, &alg, 0.8);
        let xi = sample::algebra_element(&mut rng, alg.dim(), 2.0);
        let am = alg.adjoint_matrix(&g).unwrap();
        let moved: Vec<f64> = (0..alg.dim()).map(|j| (0..alg.dim()).map(|i| xi[i] * am[(i, j)]).sum()).collect();
        let lhs = alg.lie_poisson(&moved);
        let rhs = am.transpose() * alg.lie_poisson(&xi) * &am;
        prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-8);
    }

    #[test]
    fn adjoint_is_a_homomorphism(name in prop::sample::select(ALGEBRAS), seed in any::<u64>()) {
        let alg = lie::algebra(name).unwrap();
        let mut rng = sample::rng(seed);
        let g = sample::group_element(&mut rng, &alg, 0.8);
        let h = sample::group_element(&mut rng, &alg, 0.8);
        let a = alg.adjoint_matrix(&(&g * &h)).unwrap();
        let b = alg.adjoint_matrix(&g).unwrap() * alg.adjoint_matrix(&h).unwrap();
        prop_assert!(linalg::max_abs(&(a - b)) < 1e-9);
    }

    #[test]
    fn group_law(action in closed_form_actions(), seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let z = sample_point(&action, &mut rng);
        let g = sample::group_element(&mut rng, action.algebra(), 0.3);
        let h = sample::group_element(&mut rng, action.algebra(), 0.3);
        if let Ok((id, comp)) = group_law_residuals(&action, &g, &h, &z) {
            prop_assert!(id < 1e-12);
            prop_assert!(comp < 1e-9);
        }
    }

    #[test]
    fn prolonged_group_law(order in 1usize..4, seed in any::<u64>()) {
        let jet = Prolonged::new(Action::catalog("sl2-projective").unwrap(), order).unwrap();
        let mut rng = sample::rng(seed);
        let z = sample_point(&jet, &mut rng);
        let g = sample::group_element(&mut rng, jet.algebra(), 0.2);
        let h = sample::group_element(&mut rng, jet.algebra(), 0.2);
        if let Ok((id, comp)) = group_law_residuals(&jet, &g, &h, &z) {
            prop_assert!(id < 1e-12);
            prop_assert!(comp < 1e-8 * (1.0 + z.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        }
    }

    #[test]
    fn infinitesimals_are_linear(action in closed_form_actions(), seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let z = sample_point(&action, &mut rng);
        let alg = action.algebra();
        let coef = sample::algebra_element(&mut rng, alg.dim(), 1.0);
        let phi = action.infinitesimals(&z).unwrap();
        let want = &phi * DMatrix::from_column_slice(alg.dim(), 1, &coef);
        let h = 1e-5;
        let plus = action.act(&alg.exp(&coef, h), &z).unwrap();
        let minus = action.act(&alg.exp(&coef, -h), &z).unwrap();
        for i in 0..z.len() {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            prop_assert!((fd - want[i]).abs() < 1e-6 * (1.0 + want[i].abs()));
        }
    }

    #[test]
    fn structures_are_poisson(name in prop::sample::select(ACTIONS), seed in any::<u64>()) {
        let p = assemble(Action::lookup(name).unwrap());
        let pts = poisson::sample_points(&p, 4, seed);
        prop_assert!(poisson::antisymmetry_residual(&p, &pts) <= 1e-14);
        prop_assert!(poisson::jacobi_residual(&p, &pts) < 1e-8);
    }

    #[test]
    fn second_bracket_is_antisymmetric(name in prop::sample::select(ACTIONS), seed in 0u64..1 << 40) {
        let a = Action::lookup(name).unwrap();
        let (r, p) = (a.algebra().dim(), a.dim());
        let x = polynomial_section(seed, r, p);
        let y = polynomial_section(seed + 1, r, p);
        let pts = algebroid::sample_points(&a, 4, seed);
        prop_assert!(algebroid::antisymmetry_residual(&a, &x, &y, &pts) < 1e-12);
    }

    #[test]
    fn dual_real_part_is_plain_evaluation(a in -2.0f64..2.0, b in -2.0f64..2.0, x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let e = c(a) * Expr::Sin(Box::new(var(0) * var(1))) + c(b) * Expr::Exp(Box::new(var(1))) - var(0) * var(0) * var(1);
        let f = ExprMap::scalar(2, e);
        let plain = f.eval(&[x, y])[0];
        let dual = f.eval(&[Dual::variable(x), Dual::constant(y)])[0];
        prop_assert_eq!(dual.re(), plain);
        let h = 1e-5;
        let fd = (f.eval(&[x + h, y])[0] - f.eval(&[x - h, y])[0]) / (2.0 * h);
        prop_assert!((dual.eps - fd).abs() < 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn spectral_derivative_exact_below_nyquist(k in 0usize..32, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let grid = LoopGrid::new(64, Derivative::Spectral).unwrap();
        let s = grid.nodes();
        let f: Vec<f64> = s.iter().map(|t| a * (k as f64 * t).cos() + b * (k as f64 * t).sin()).collect();
        let d = grid.derivative_f64(&f);
        for (t, v) in s.iter().zip(&d) {
            let want = k as f64 * (b * (k as f64 * t).cos() - a * (k as f64 * t).sin());
            prop_assert!((v - want).abs() < 1e-12 * (1.0 + k as f64));
        }
        prop_assert!(grid.integrate(&d).abs() < 1e-10);
    }

    #[test]
    fn star_product_is_associative(seed in any::<u64>()) {
        let a = Action::catalog("sl2-projective").unwrap();
        let alg = a.algebra();
        let sec = |s: u64| {
            let m = polynomial_section(s, 3, 1);
            ExprMap::new(1, m.exprs.iter().map(|e| c(0.3) * e.clone()).collect())
        };
        let (x, y, w) = (sec(seed), sec(seed ^ 1), sec(seed ^ 2));
        let g = ExpSection { alg, x: &x, t: 1.0 };
        let h = ExpSection { alg, x: &y, t: 1.0 };
        let f = ExpSection { alg, x: &w, t: 1.0 };
        let pts = vec![vec![0.1], vec![-0.2], vec![0.35]];
        if let Ok(res) = associativity_residual(&a, &g, &h, &f, &pts) {
            prop_assert!(res < 1e-10);
        }
    }

    #[test]
    fn trajectories_are_well_formed(x0 in prop::collection::vec(-1.0f64..1.0, 6), steps in 1usize..200) {
        let p = assemble(Action::catalog("so3-linear").unwrap());
        let dt = 1e-2;
        let h = ExprMap::scalar(6, (0..6).fold(c(0.0), |acc, i| acc + c(0.5 + i as f64) * var(i) * var(i)));
        let traj = hamilton::flow(&p, &h, &x0, steps as f64 * dt, dt).unwrap();
        prop_assert_eq!(traj.len(), steps + 1);
        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(traj.states.iter().all(|s| s.len() == 6 && s.iter().all(|v| v.is_finite())));
        prop_assert!(smooth::value(&h, traj.last()).is_finite());
    }
}
