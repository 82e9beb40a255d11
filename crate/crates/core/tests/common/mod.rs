#![allow(dead_code)]

use num_complex::Complex64;
use qdt_core::state::{make_density, DensityOperator, EvolutionGenerator, Profile, StateSpec};
use qdt_core::tensor::{product_basis, standard_basis, ComplexMatrix, SpaceLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Mixture of `terms` random pure states.
pub fn random_state(layout: &SpaceLayout, rng: &mut ChaCha8Rng, terms: usize) -> DensityOperator {
    let d = layout.total_dim();
    let items = (0..terms)
        .map(|_| (rng.random_range(0.05..1.0), random_vector(rng, d)))
        .collect();
    make_density(&StateSpec::Mixture(items), layout).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let h = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    &h + &h.adjoint()
}

pub fn random_basis(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<Complex64>> {
    random_hermitian(rng, d).hermitian_eigen().unwrap().1
}

pub fn random_levels(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

pub fn random_generator(layout: &SpaceLayout, rng: &mut ChaCha8Rng, rate: f64) -> EvolutionGenerator {
    let d = layout.total_dim();
    let basis = random_basis(rng, d);
    let levels = random_levels(rng, d);
    EvolutionGenerator::new(layout.clone(), basis, levels, Profile::Constant, rate).unwrap()
}

/// Eigenbasis `|n⟩ ⊗ |α⟩` on a two-factor layout (alternatives, subject)
/// with well separated levels.
pub fn product_generator(layout: &SpaceLayout, rng: &mut ChaCha8Rng, rate: f64) -> EvolutionGenerator {
    let (da, ds) = (layout.factors()[0].1, layout.factors()[1].1);
    let basis = product_basis(&random_basis(rng, da), &standard_basis(ds));
    let levels = (0..da * ds)
        .map(|i| 0.5 + i as f64 * 0.73 + 0.01 * (i * i) as f64)
        .collect();
    EvolutionGenerator::new(layout.clone(), basis, levels, Profile::Constant, rate).unwrap()
}

/// Sorted spectrum of a Hermitian matrix.
pub fn spectrum(m: &ComplexMatrix) -> Vec<f64> {
    let mut v = m.hermitian_eigenvalues().unwrap();
    v.sort_by(f64::total_cmp);
    v
}
