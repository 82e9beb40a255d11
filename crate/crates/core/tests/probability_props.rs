mod common;

use common::*;
use proptest::prelude::*;
use qdt_core::measures::AlternativeSet;
use qdt_core::probability::{
    joint_probability, luders_probability, single_probability, wigner_probability, Stage, SuccessiveProtocol,
};
use qdt_core::state::{evolve, DecisionWindow};
use qdt_core::tensor::SpaceLayout;
use rand_chacha::ChaCha8Rng;

fn protocol(r: &mut ChaCha8Rng, da: usize, db: usize, ds: usize, gap: f64) -> SuccessiveProtocol {
    let ga = random_generator(&SpaceLayout::new([("A", da), ("S", ds)]).unwrap(), r, 1.0);
    let gb = random_generator(&SpaceLayout::new([("B", db), ("S", ds)]).unwrap(), r, 1.0);
    SuccessiveProtocol::new(
        Stage {
            alternatives: AlternativeSet::new("A", random_basis(r, da)).unwrap(),
            generator: ga,
            window: DecisionWindow::new(0.0, 1.0).unwrap(),
        },
        Stage {
            alternatives: AlternativeSet::new("B", random_basis(r, db)).unwrap(),
            generator: gb,
            window: DecisionWindow::new(1.0 + gap, 1.0).unwrap(),
        },
    )
    .unwrap()
}

proptest! {
    #[test]
    fn wigner_is_luders_times_probability(d in 2usize..6, seed in any::<u64>(), t in 0.0..3.0f64) {
        let layout = SpaceLayout::new([("A", d), ("S", 2)]).unwrap();
        let mut r = rng(seed);
        let rho0 = random_state(&layout, &mut r, 3);
        let gen = random_generator(&layout, &mut r, 1.0);
        let rho = evolve(&rho0, &gen, 0.0, t).unwrap();
        let alts = AlternativeSet::new("A", random_basis(&mut r, d)).unwrap();
        for n in 0..d {
            for m in 0..d {
                let pn = alts.projector_op(n).unwrap();
                let pm = alts.projector_op(m).unwrap();
                let w = wigner_probability(&rho, &pn, &pm).unwrap();
                let l = luders_probability(&rho, &pn, &pm).unwrap();
                let p = single_probability(&rho, &pn).unwrap();
                prop_assert!((w - l * p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_probabilities_are_real_and_marginalize(
        da in 2usize..4,
        db in 2usize..4,
        seed in any::<u64>(),
        gap in 0.0..1.0f64,
        t in 0.0..4.0f64,
    ) {
        let layout = SpaceLayout::new([("A", da), ("B", db), ("S", 2)]).unwrap();
        let mut r = rng(seed);
        let rho = random_state(&layout, &mut r, 3);
        let p = protocol(&mut r, da, db, 2, gap);
        let evolved = p.evolve(&rho, 0.0, t).unwrap();
        for n in 0..da {
            let mut total = 0.0;
            for k in 0..db {
                let rec = joint_probability(&rho, &p, n, k, t).unwrap();
                prop_assert!(rec.imaginary <= 1e-12);
                prop_assert!(rec.value > -1e-12 && rec.value < 1.0 + 1e-12);
                total += rec.value;
            }
            let alone = single_probability(&evolved, &p.first().alternatives.projector_op(n).unwrap()).unwrap();
            prop_assert!((total - alone).abs() < 1e-10);
        }
    }
}
