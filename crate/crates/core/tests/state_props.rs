mod common;

use common::*;
use proptest::prelude::*;
use qdt_core::measures::AlternativeSet;
use qdt_core::state::{dephase, evolve, luders_update};
use qdt_core::tensor::{trace_product, SpaceLayout};
use qdt_core::Error;

fn layout(d: usize) -> SpaceLayout {
    SpaceLayout::single("A", d).unwrap()
}

proptest! {
    #[test]
    fn evolution_is_unitary(d in 1usize..9, seed in any::<u64>(), t0 in -3.0..3.0f64, t1 in -3.0..3.0f64) {
        let l = layout(d);
        let mut r = rng(seed);
        let rho = random_state(&l, &mut r, 3);
        let gen = random_generator(&l, &mut r, 1.0);
        let out = evolve(&rho, &gen, t0, t1).unwrap();
        prop_assert!((out.matrix().trace() - rho.matrix().trace()).norm() < 1e-12);
        prop_assert!(out.matrix().hermitian_deviation() < 1e-12);
        for (a, b) in spectrum(out.matrix()).iter().zip(spectrum(rho.matrix())) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_composes(d in 1usize..7, seed in any::<u64>(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let l = layout(d);
        let mut r = rng(seed);
        let rho = random_state(&l, &mut r, 2);
        let gen = random_generator(&l, &mut r, 1.3);
        let two = evolve(&evolve(&rho, &gen, 0.0, s).unwrap(), &gen, s, t).unwrap();
        let one = evolve(&rho, &gen, 0.0, t).unwrap();
        prop_assert!(two.matrix().max_abs_diff(one.matrix()) < 1e-10);
    }

    #[test]
    fn slow_rate_freezes_state(d in 1usize..7, seed in any::<u64>()) {
        let l = layout(d);
        let mut r = rng(seed);
        let rho = random_state(&l, &mut r, 2);
        let gen = random_generator(&l, &mut r, 1e-8);
        let out = evolve(&rho, &gen, 0.0, 1.0).unwrap();
        prop_assert!(out.matrix().max_abs_diff(rho.matrix()) <= 1e-6);
    }

    #[test]
    fn luders_state_is_certain(d in 2usize..7, seed in any::<u64>(), n in 0usize..6) {
        let l = layout(d);
        let mut r = rng(seed);
        let rho = random_state(&l, &mut r, 3);
        let alts = AlternativeSet::new("A", random_basis(&mut r, d)).unwrap();
        let p = alts.projector_op(n % d).unwrap();
        match luders_update(&rho, &p) {
            Ok(post) => {
                let v = trace_product(post.matrix(), p.matrix()).unwrap();
                prop_assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
            }
            Err(e) => prop_assert!(matches!(e, Error::ImpossibleConditioning(_))),
        }
    }

    #[test]
    fn dephasing_is_idempotent(d in 1usize..9, seed in any::<u64>()) {
        let l = layout(d);
        let mut r = rng(seed);
        let rho = random_state(&l, &mut r, 3);
        let basis = random_basis(&mut r, d);
        let once = dephase(&rho, &basis).unwrap();
        let twice = dephase(&once, &basis).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
        prop_assert!((once.matrix().trace() - rho.matrix().trace()).norm() < 1e-12);
    }
}
