//! Rational fraction and attraction factor of behavioral probabilities.

use crate::error::{Error, Result};
use crate::measures::{
    normalize_with, prospect_family, subject_blocks, AlternativeSet, FeelingAmplitudes,
    Normalization,
};
use crate::state::{evolve, time_average, DecisionWindow, DensityOperator, EvolutionGenerator};
use crate::tensor::c;

/// Residual allowed between the prospect weight and one.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// `p = f + q` for one alternative at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehavioralProbability {
    pub alternative: usize,
    pub time: f64,
    pub f: f64,
    pub q: f64,
    pub p: f64,
}

impl BehavioralProbability {
    pub fn new(alternative: usize, time: f64, f: f64, q: f64) -> Self {
        Self {
            alternative,
            time,
            f,
            q,
            p: f + q,
        }
    }
}

/// Splits the prospect probability of alternative `n` into its diagonal
/// (rational) and off-diagonal (attraction) parts in the subject basis.
/// `feelings` must already be normalized in `state`.
pub fn decompose(
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
    n: usize,
    t: f64,
) -> Result<BehavioralProbability> {
    decompose_all(state, alts, feelings, t)?
        .into_iter()
        .nth(n)
        .ok_or(Error::IndexOutOfRange {
            index: n,
            size: alts.len(),
        })
}

/// [`decompose`] for every alternative.
pub fn decompose_all(
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
    t: f64,
) -> Result<Vec<BehavioralProbability>> {
    let fam = prospect_family(alts, feelings)?;
    let mut weight = 0.0;
    for p in &fam {
        weight += state.expectation(p.operator())?.re;
    }
    if (weight - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized(weight - 1.0));
    }
    let blocks = subject_blocks(state, alts, feelings.subject())?;
    let ds = feelings.subject_dim();
    blocks
        .iter()
        .enumerate()
        .map(|(n, g)| {
            let b = feelings.row(n);
            let mut f = 0.0;
            let mut q = c(0.0, 0.0);
            for a in 0..ds {
                f += b[a].norm_sqr() * g[(a, a)].re;
                for bb in 0..ds {
                    if a != bb {
                        q += b[a].conj() * g[(a, bb)] * b[bb];
                    }
                }
            }
            if q.im.abs() > 1e-10 {
                return Err(Error::Consistency(format!(
                    "attraction factor of alternative {n} has imaginary part {:e}",
                    q.im
                )));
            }
            Ok(BehavioralProbability::new(n, t, f, q.re))
        })
        .collect()
}

/// Decomposition in the state evolved to `t` under `gen` at rate `g`; the
/// feelings are renormalized in the evolved state with `policy`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_behavioral(
    state0: &DensityOperator,
    gen: &EvolutionGenerator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
    n: usize,
    t: f64,
    g: f64,
    policy: Normalization,
) -> Result<BehavioralProbability> {
    let rho = evolve(state0, &gen.with_rate(g)?, 0.0, t)?;
    let norm = normalize_with(policy, &rho, alts, feelings)?;
    decompose(&rho, alts, &norm, n, t)
}

/// Like [`evolve_behavioral`] but in the decision state averaged over the
/// window `[0, t]`. Coherences between distinct levels decay like
/// `1 / (g · t)`, so the attraction factor vanishes in the fast limit.
#[allow(clippy::too_many_arguments)]
pub fn evolve_behavioral_averaged(
    state0: &DensityOperator,
    gen: &EvolutionGenerator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
    n: usize,
    t: f64,
    g: f64,
    policy: Normalization,
) -> Result<BehavioralProbability> {
    let window = DecisionWindow::new(0.0, t)?;
    let rho = time_average(state0, &gen.with_rate(g)?, 0.0, &window)?;
    let norm = normalize_with(policy, &rho, alts, feelings)?;
    decompose(&rho, alts, &norm, n, t)
}

/// True when every entry satisfies `|p − f| = |q|` and the last `|q|` is at
/// most `tol`.
pub fn correspondence_check(sequence: &[BehavioralProbability], tol: f64) -> bool {
    let consistent = sequence
        .iter()
        .all(|b| ((b.p - b.f).abs() - b.q.abs()).abs() <= 1e-12);
    consistent && sequence.last().is_some_and(|b| b.q.abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{balance_feelings, normalize_feelings, sample_feelings, FeelingDistribution};
    use crate::probability::fast_limit_state;
    use crate::state::{make_density, Profile, StateSpec};
    use crate::tensor::{inner, kron_vec, product_basis, standard_basis, ComplexMatrix, SpaceLayout};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
        (0..d)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn random_state(layout: &SpaceLayout, seed: u64) -> DensityOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = layout.total_dim();
        let items = (0..2).map(|_| (rng.random_range(0.1..1.0), random_vector(&mut rng, d))).collect();
        make_density(&StateSpec::Mixture(items), layout).unwrap()
    }

    // Eigenbasis |n⟩ ⊗ |α⟩: a random basis of the alternative factor times
    // the subject basis the feelings are expressed in.
    fn generator(layout: &SpaceLayout, seed: u64) -> EvolutionGenerator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (da, ds) = (layout.factors()[0].1, layout.factors()[1].1);
        let h = ComplexMatrix::from_fn(da, da, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (_, alt_basis) = (&h + &h.adjoint()).hermitian_eigen().unwrap();
        let basis = product_basis(&alt_basis, &standard_basis(ds));
        let levels = (0..da * ds).map(|i| 0.5 + i as f64 * 0.73 + 0.01 * (i * i) as f64).collect();
        EvolutionGenerator::new(layout.clone(), basis, levels, Profile::Constant, 1.0).unwrap()
    }

    #[test]
    fn one_dimensional_subject_has_no_attraction() {
        let layout = SpaceLayout::new([("A", 3), ("S", 1)]).unwrap();
        let rho = random_state(&layout, 1);
        let alts = AlternativeSet::standard("A", 3).unwrap();
        let f = normalize_feelings(&rho, &alts, &FeelingAmplitudes::unit("S", 3, 1).unwrap()).unwrap();
        for b in decompose_all(&rho, &alts, &f, 0.0).unwrap() {
            assert_eq!(b.q, 0.0);
            assert_eq!(b.p, b.f);
        }
    }

    #[test]
    fn product_state_double_sum() {
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let rho_a = random_state(&SpaceLayout::single("A", 2).unwrap(), 2);
        let phi = vec![c(0.6, 0.1), c(-0.3, 0.5), c(0.2, -0.4)];
        let rho_s = make_density(&StateSpec::Pure(phi.clone()), &SpaceLayout::single("S", 3).unwrap()).unwrap();
        let rho = rho_a.product(&rho_s).unwrap();
        let raw = sample_feelings("S", 2, 3, 5, FeelingDistribution::default()).unwrap();
        let f = normalize_feelings(&rho, &alts, &raw).unwrap();
        let phi_n: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        for n in 0..2 {
            let b = f.row(n);
            let a_nn = rho_a.matrix()[(n, n)].re;
            // ⟨α|ρ_S|β⟩ = φ_α φ*_β / |φ|², so the full sum is |Σ b*_α φ_α|²
            // and the diagonal part is Σ |b_α φ_α|².
            let full = inner(&b, &phi).norm_sqr() / phi_n;
            let diag: f64 = b.iter().zip(&phi).map(|(x, y)| (x * y).norm_sqr()).sum::<f64>() / phi_n;
            let got = decompose(&rho, &alts, &f, n, 0.0).unwrap();
            assert!((got.q - a_nn * (full - diag)).abs() < 1e-12);
            assert!((got.f - a_nn * diag).abs() < 1e-12);
        }
    }

    #[test]
    fn prospect_probability_equals_sum() {
        let layout = SpaceLayout::new([("A", 3), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 8);
        let alts = AlternativeSet::standard("A", 3).unwrap();
        let raw = sample_feelings("S", 3, 2, 8, FeelingDistribution::default()).unwrap();
        let f = balance_feelings(&rho, &alts, &raw).unwrap();
        let parts = decompose_all(&rho, &alts, &f, 0.0).unwrap();
        for (n, b) in parts.iter().enumerate() {
            let v = kron_vec(alts.vectors()[n].as_slice(), &f.row(n));
            let direct = inner(&v, &rho.matrix().apply(&v).unwrap()).re;
            assert!((b.p - direct).abs() < 1e-12);
        }
        let sp: f64 = parts.iter().map(|b| b.p).sum();
        let sq: f64 = parts.iter().map(|b| b.q).sum();
        let sf: f64 = parts.iter().map(|b| b.f).sum();
        assert!((sp - 1.0).abs() < 1e-10);
        assert!((sf - 1.0).abs() < 1e-10);
        assert!(sq.abs() < 1e-10);
    }

    #[test]
    fn unnormalized_feelings_are_rejected() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 3);
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let raw = sample_feelings("S", 2, 2, 3, FeelingDistribution::default()).unwrap();
        let f = normalize_feelings(&rho, &alts, &raw).unwrap();
        assert!(matches!(
            decompose(&rho, &alts, &f.scaled(1.1), 0, 0.0),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn slow_rate_keeps_probability() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 4);
        let gen = generator(&layout, 4);
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let raw = sample_feelings("S", 2, 2, 4, FeelingDistribution::default()).unwrap();
        for policy in [Normalization::Scalar, Normalization::Balanced] {
            let start = decompose(&rho, &alts, &normalize_with(policy, &rho, &alts, &raw).unwrap(), 0, 0.0).unwrap();
            let later = evolve_behavioral(&rho, &gen, &alts, &raw, 0, 1.0, 1e-8, policy).unwrap();
            assert!((later.p - start.p).abs() <= 1e-6);
        }
    }

    #[test]
    fn fast_rate_suppresses_attraction_on_average() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 5);
        let gen = generator(&layout, 5);
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let raw = sample_feelings("S", 2, 2, 5, FeelingDistribution::default()).unwrap();
        let mut seq = Vec::new();
        for &t in &[1e-3, 1e-1, 1.0] {
            let b = evolve_behavioral_averaged(&rho, &gen, &alts, &raw, 0, t, 1e6, Normalization::Scalar).unwrap();
            seq.push(b);
        }
        assert!(seq.last().unwrap().q.abs() <= 1e-3);
        assert!(correspondence_check(&seq, 1e-3));

        // The instantaneous attraction keeps oscillating with finite amplitude.
        let amplitude = (0..200)
            .map(|i| {
                evolve_behavioral(&rho, &gen, &alts, &raw, 0, 1.0 + i as f64 * 1e-7, 1e6, Normalization::Scalar)
                    .unwrap()
                    .q
                    .abs()
            })
            .fold(0.0f64, f64::max);
        assert!(amplitude > 1e-3);
    }

    #[test]
    fn endpoints_match_limit_states() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 6);
        let gen = generator(&layout, 6);
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let raw = sample_feelings("S", 2, 2, 6, FeelingDistribution::default()).unwrap();
        let policy = Normalization::Scalar;

        let slow_oracle = decompose(&rho, &alts, &normalize_with(policy, &rho, &alts, &raw).unwrap(), 1, 1.0).unwrap();
        let slow = evolve_behavioral_averaged(&rho, &gen, &alts, &raw, 1, 1.0, 1e-8, policy).unwrap();
        assert!((slow.p - slow_oracle.p).abs() < 1e-6);

        let fast_state = fast_limit_state(&rho, &gen).unwrap();
        let fast_oracle =
            decompose(&fast_state, &alts, &normalize_with(policy, &fast_state, &alts, &raw).unwrap(), 1, 1.0).unwrap();
        let fast = evolve_behavioral_averaged(&rho, &gen, &alts, &raw, 1, 1.0, 1e6, policy).unwrap();
        assert!((fast.p - fast_oracle.p).abs() < 1e-3);

        // Intermediate rates still give a normalized distribution.
        let mid: f64 = (0..2)
            .map(|n| evolve_behavioral_averaged(&rho, &gen, &alts, &raw, n, 1.0, 1.0, policy).unwrap().p)
            .sum();
        assert!((mid - 1.0).abs() < 1e-10);
    }

    #[test]
    fn correspondence_examples() {
        let zero: Vec<_> = (0..3).map(|i| BehavioralProbability::new(0, i as f64, 0.4, 0.0)).collect();
        assert!(correspondence_check(&zero, 1e-3));
        let stuck: Vec<_> = (0..3).map(|i| BehavioralProbability::new(0, i as f64, 0.4, 0.25)).collect();
        assert!(!correspondence_check(&stuck, 1e-3));
        assert!(!correspondence_check(&[], 1e-3));
    }
}
