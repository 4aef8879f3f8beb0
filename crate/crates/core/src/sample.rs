//! Seeded sampling of points, algebra elements and group elements.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lie::LieAlgebra;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn in_box(rng: &mut SampleRng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| uniform(rng, lo, hi))
        .collect()
}

/// Random algebra coordinates with Euclidean norm at most `radius`.
pub fn algebra_element(rng: &mut SampleRng, dim: usize, radius: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let norm = num_traits::Float::sqrt(v.iter().map(|x| x * x).sum::<f64>()).max(1e-12);
    let r = radius * uniform(rng, 0.1, 1.0);
    v.into_iter().map(|x| x * r / norm).collect()
}

/// `exp(x)` for a random `x` with `‖x‖ ≤ radius`.
pub fn group_element(rng: &mut SampleRng, alg: &LieAlgebra, radius: f64) -> DMatrix<f64> {
    let x = algebra_element(rng, alg.dim(), radius);
    alg.exp(&x, 1.0)
}
