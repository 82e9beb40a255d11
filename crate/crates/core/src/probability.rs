//! Choice probabilities: single, evolved, post-decision, successive and
//! behavioral joint, Kirkwood, and the slow and fast limits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{
    normalize_feelings, prospect_family, AlternativeSet, FeelingAmplitudes, ProspectOperator,
};
use crate::state::{evolve, luders_update, DecisionWindow, DensityOperator, EvolutionGenerator};
use crate::tensor::{c, trace_product, ComplexMatrix, LocalOperator};

/// Tolerance for the imaginary residue of quantities that must be real.
pub const REAL_TOL: f64 = 1e-12;

/// Identifies the data a probability was conditioned on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordContext {
    pub state: String,
    pub generator: String,
    pub window: Option<DecisionWindow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityRecord {
    pub value: f64,
    pub time: f64,
    pub context: RecordContext,
}

impl ProbabilityRecord {
    pub fn new(value: f64, time: f64, context: RecordContext) -> Result<Self> {
        if !(-1e-10..=1.0 + 1e-10).contains(&value) {
            return Err(Error::Consistency(format!("probability {value} outside [0, 1]")));
        }
        Ok(Self { value, time, context })
    }
}

/// Clamps floating-point noise just outside `[0, 1]`. Only for output.
pub fn clamp_for_report(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-10 {
        return Err(Error::Consistency(format!(
            "{what} has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `Tr(ρ P)` with the state reduced onto the projector's factors.
pub fn single_probability(state: &DensityOperator, proj: &LocalOperator) -> Result<f64> {
    real_part(state.expectation(proj)?, "probability")
}

/// Probability at time `t` from the eigenphase double sum
/// `Σ_{uv} φ_u ρ_{uv} φ*_v ⟨v|P|u⟩` in the generator eigenbasis.
pub fn evolved_probability(
    state0: &DensityOperator,
    gen: &EvolutionGenerator,
    proj: &LocalOperator,
    t: f64,
) -> Result<f64> {
    if state0.layout() != gen.layout() {
        return Err(Error::Layout(format!(
            "generator on {} cannot act on a state on {}",
            gen.layout(),
            state0.layout()
        )));
    }
    let angles = gen.phase_angles(0.0, t)?;
    let phases: Vec<Complex64> = angles.iter().map(|a| Complex64::from_polar(1.0, -a)).collect();
    let rho = gen.to_eigenbasis(state0.matrix());
    let p = gen.to_eigenbasis(&proj.embed(state0.layout())?);
    let dim = gen.dim();
    let mut acc = c(0.0, 0.0);
    for u in 0..dim {
        for v in 0..dim {
            acc += phases[u] * rho[(u, v)] * phases[v].conj() * p[(v, u)];
        }
    }
    real_part(acc, "evolved probability")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    Slow,
    Fast,
}

/// Long-time phase average of `state` under `gen`: coherences between
/// eigenvectors with different levels vanish, those inside a degenerate
/// level survive.
pub fn fast_limit_state(state: &DensityOperator, gen: &EvolutionGenerator) -> Result<DensityOperator> {
    if state.layout() != gen.layout() {
        return Err(Error::Layout(format!(
            "generator on {} cannot act on a state on {}",
            gen.layout(),
            state.layout()
        )));
    }
    let mut rho = gen.to_eigenbasis(state.matrix());
    let levels = gen.levels();
    let scale = levels.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    for u in 0..gen.dim() {
        for v in 0..gen.dim() {
            if (levels[u] - levels[v]).abs() > 1e-12 * scale {
                rho[(u, v)] = c(0.0, 0.0);
            }
        }
    }
    DensityOperator::new(hermitize(&gen.from_eigenbasis(&rho)), state.layout().clone())
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}

/// Slow mode: the initial probability. Fast mode: the probability in the
/// phase-averaged state.
pub fn limit_probability(
    state0: &DensityOperator,
    gen: &EvolutionGenerator,
    proj: &LocalOperator,
    mode: LimitMode,
) -> Result<f64> {
    match mode {
        LimitMode::Slow => single_probability(state0, proj),
        LimitMode::Fast => single_probability(&fast_limit_state(state0, gen)?, proj),
    }
}

/// Probability of `P(A_m)` at `t` after `A_n` was chosen at `t_n`: evolve to
/// `t_n`, condition on `P(A_n)`, evolve on to `t`.
pub fn post_decision_probability(
    state0: &DensityOperator,
    gen: &EvolutionGenerator,
    alts: &AlternativeSet,
    chosen: usize,
    t_n: f64,
    target: usize,
    t: f64,
) -> Result<f64> {
    if t < t_n {
        return Err(Error::InvalidConfig(format!(
            "evaluation time {t} precedes the decision at {t_n}"
        )));
    }
    let at_decision = evolve(state0, gen, 0.0, t_n)?;
    let reset = luders_update(&at_decision, &alts.projector_op(chosen)?)?;
    let later = evolve(&reset, gen, t_n, t)?;
    single_probability(&later, &alts.projector_op(target)?)
}

/// `Tr(ρ_L P_m)` with `ρ_L` the Lüders state of `state` conditioned on `p_n`.
pub fn luders_probability(state: &DensityOperator, p_n: &LocalOperator, p_m: &LocalOperator) -> Result<f64> {
    single_probability(&luders_update(state, p_n)?, p_m)
}

/// `Tr(P_n ρ P_n P_m)`.
pub fn wigner_probability(state: &DensityOperator, p_n: &LocalOperator, p_m: &LocalOperator) -> Result<f64> {
    let pn = p_n.embed(state.layout())?;
    let pm = p_m.embed(state.layout())?;
    let sandwich = &(&pn * state.matrix()) * &pn;
    real_part(trace_product(&sandwich, &pm)?, "Wigner probability")
}

/// `Tr(ρ P(B_k) P(A_n))` for two projectors on the same factor. Complex in
/// general.
pub fn kirkwood(state: &DensityOperator, p_b: &LocalOperator, p_a: &LocalOperator) -> Result<Complex64> {
    if p_a.layout() != p_b.layout() {
        return Err(Error::DimensionMismatch(format!(
            "Kirkwood projectors act on {} and {}",
            p_b.layout(),
            p_a.layout()
        )));
    }
    let labels: Vec<&str> = p_a.layout().labels().collect();
    let reduced = state.reduced(&labels)?;
    let pb = p_b.embed(reduced.layout())?;
    let pa = p_a.embed(reduced.layout())?;
    trace_product(reduced.matrix(), &(&pb * &pa))
}

/// One decision of a successive protocol: its alternatives, the generator
/// active during its window, and the window.
#[derive(Debug, Clone)]
pub struct Stage {
    pub alternatives: AlternativeSet,
    pub generator: EvolutionGenerator,
    pub window: DecisionWindow,
}

/// Two decisions in time order. Outside the windows the generator is zero.
#[derive(Debug, Clone)]
pub struct SuccessiveProtocol {
    first: Stage,
    second: Stage,
}

impl SuccessiveProtocol {
    pub fn new(first: Stage, second: Stage) -> Result<Self> {
        if second.window.start() < first.window.end() {
            return Err(Error::OverlappingWindows(format!(
                "second window starts at {} before the first ends at {}",
                second.window.start(),
                first.window.end()
            )));
        }
        if first.alternatives.label() == second.alternatives.label() {
            return Err(Error::Layout(format!(
                "both decisions act on factor {}",
                first.alternatives.label()
            )));
        }
        Ok(Self { first, second })
    }

    pub fn first(&self) -> &Stage {
        &self.first
    }

    pub fn second(&self) -> &Stage {
        &self.second
    }

    /// Same windows, questions asked in the other order.
    pub fn swapped(&self) -> Self {
        let first = Stage {
            window: self.first.window,
            ..self.second.clone()
        };
        let second = Stage {
            window: self.second.window,
            ..self.first.clone()
        };
        Self { first, second }
    }

    /// Windows reflected through `t = 0`. The reflected protocol is stored in
    /// its own time order, so the original second decision comes first.
    pub fn mirrored(&self) -> Result<Self> {
        let reflect = |s: &Stage| -> Result<Stage> {
            Ok(Stage {
                window: DecisionWindow::new(-s.window.end(), s.window.duration())?,
                ..s.clone()
            })
        };
        Self::new(reflect(&self.second)?, reflect(&self.first)?)
    }

    /// Evolves through both windows between `t0` and `t1`, either direction.
    pub fn evolve(&self, state: &DensityOperator, t0: f64, t1: f64) -> Result<DensityOperator> {
        let mut stages = [&self.first, &self.second];
        if t1 < t0 {
            stages.reverse();
        }
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        let mut rho = state.clone();
        for stage in stages {
            let a = stage.window.start().max(lo);
            let b = stage.window.end().min(hi);
            if b <= a {
                continue;
            }
            let gen = stage.generator.embed(state.layout())?;
            rho = if t1 >= t0 {
                evolve(&rho, &gen, a, b)?
            } else {
                evolve(&rho, &gen, b, a)?
            };
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointProbabilityRecord {
    pub value: f64,
    /// `|Im Tr(ρ(t) P ⊗ P)|`, kept for auditing.
    pub imaginary: f64,
    /// `(label, index)` of the first and the second decision.
    pub order: ((String, usize), (String, usize)),
    pub time: f64,
}

/// Probability that the first decision of `protocol` selects `n` and the
/// second selects `k`, evaluated in the state at time `t`.
pub fn joint_probability(
    state0: &DensityOperator,
    protocol: &SuccessiveProtocol,
    n: usize,
    k: usize,
    t: f64,
) -> Result<JointProbabilityRecord> {
    let rho = protocol.evolve(state0, 0.0, t)?;
    let pa = protocol.first.alternatives.projector_op(n)?;
    let pb = protocol.second.alternatives.projector_op(k)?;
    let op = LocalOperator::disjoint_product(&[&pb, &pa])?;
    let z = rho.expectation(&op)?;
    if z.im.abs() > REAL_TOL {
        return Err(Error::Consistency(format!(
            "joint probability has imaginary part {:e}",
            z.im
        )));
    }
    Ok(JointProbabilityRecord {
        value: z.re,
        imaginary: z.im.abs(),
        order: (
            (protocol.first.alternatives.label().to_string(), n),
            (protocol.second.alternatives.label().to_string(), k),
        ),
        time: t,
    })
}

/// Rescales both feeling tables by `W^{-1/4}`, `W` being the summed joint
/// prospect weight in `state`, so that the joint prospect probabilities sum
/// to one.
pub fn normalize_joint_feelings(
    state: &DensityOperator,
    first: (&AlternativeSet, &FeelingAmplitudes),
    second: (&AlternativeSet, &FeelingAmplitudes),
) -> Result<(FeelingAmplitudes, FeelingAmplitudes)> {
    let fam_a = prospect_family(first.0, first.1)?;
    let fam_b = prospect_family(second.0, second.1)?;
    let sum_a = sum_operator(&fam_a)?;
    let sum_b = sum_operator(&fam_b)?;
    let w = state
        .expectation(&LocalOperator::disjoint_product(&[&sum_b, &sum_a])?)?
        .re;
    if !(w > 1e-300) || !w.is_finite() {
        return Err(Error::ZeroWeight);
    }
    let s = w.powf(-0.25);
    Ok((first.1.scaled(s), second.1.scaled(s)))
}

fn sum_operator(fam: &[ProspectOperator]) -> Result<LocalOperator> {
    let first = fam
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty prospect family".into()))?;
    let mut m = first.matrix().clone();
    for p in &fam[1..] {
        m = &m + p.matrix();
    }
    LocalOperator::new(first.operator().layout().clone(), m)
}

/// Behavioral joint probability `Tr(ρ(t) P(B_k z_k) ⊗ P(A_n z_n))`; feelings
/// are normalized jointly in `ρ(t)` first.
pub fn behavioral_joint(
    state0: &DensityOperator,
    protocol: &SuccessiveProtocol,
    feelings_first: &FeelingAmplitudes,
    feelings_second: &FeelingAmplitudes,
    n: usize,
    k: usize,
    t: f64,
) -> Result<f64> {
    let rho = protocol.evolve(state0, 0.0, t)?;
    let (fa, fb) = normalize_joint_feelings(
        &rho,
        (&protocol.first.alternatives, feelings_first),
        (&protocol.second.alternatives, feelings_second),
    )?;
    let pa = crate::measures::prospect_operator(&protocol.first.alternatives, n, &fa)?;
    let pb = crate::measures::prospect_operator(&protocol.second.alternatives, k, &fb)?;
    let op = LocalOperator::disjoint_product(&[pb.operator(), pa.operator()])?;
    real_part(rho.expectation(&op)?, "behavioral joint probability")
}

/// Normalized prospect probabilities of every alternative in `state`.
pub fn prospect_probabilities(
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
) -> Result<Vec<f64>> {
    let norm = normalize_feelings(state, alts, feelings)?;
    prospect_family(alts, &norm)?
        .iter()
        .map(|p| real_part(state.expectation(p.operator())?, "prospect probability"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{dephase, make_density, Profile, StateSpec};
    use crate::tensor::{basis_vector, product_basis, SpaceLayout, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
        (0..d)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn random_state(layout: &SpaceLayout, seed: u64) -> DensityOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = layout.total_dim();
        let items = (0..3).map(|_| (rng.random_range(0.1..1.0), random_vector(&mut rng, d))).collect();
        make_density(&StateSpec::Mixture(items), layout).unwrap()
    }

    fn random_basis(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<Complex64>> {
        let h = ComplexMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = &h + &h.adjoint();
        h.hermitian_eigen().unwrap().1
    }

    fn random_levels(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    fn qubit() -> SpaceLayout {
        SpaceLayout::single("A", 2).unwrap()
    }

    #[test]
    fn single_probability_examples() {
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let rho = make_density(&StateSpec::Pure(basis_vector(2, 0)), &qubit()).unwrap();
        assert!((single_probability(&rho, &alts.projector_op(0).unwrap()).unwrap() - 1.0).abs() < 1e-15);

        let mixed = make_density(
            &StateSpec::Mixture(vec![(1.0, basis_vector(2, 0)), (1.0, basis_vector(2, 1))]),
            &qubit(),
        )
        .unwrap();
        let s = FRAC_1_SQRT_2;
        let tilted = AlternativeSet::new("A", vec![vec![c(s, 0.0), c(0.0, s)]]).unwrap();
        assert!((single_probability(&mixed, &tilted.projector_op(0).unwrap()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn composite_and_reduced_agree() {
        let layout = SpaceLayout::new([("A", 3), ("S", 2)]).unwrap();
        let rho = random_state(&layout, 4);
        let alts = AlternativeSet::standard("A", 3).unwrap();
        let reduced = rho.reduced(&["A"]).unwrap();
        for n in 0..3 {
            let p = alts.projector_op(n).unwrap();
            let full = trace_product(rho.matrix(), &p.embed(&layout).unwrap()).unwrap().re;
            let short = single_probability(&reduced, &p).unwrap();
            assert!((full - short).abs() < 1e-12);
            assert!((single_probability(&rho, &p).unwrap() - full).abs() < 1e-12);
        }
    }

    #[test]
    fn evolved_probability_paths_agree() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gen = EvolutionGenerator::new(
            layout.clone(),
            random_basis(&mut rng, 4),
            random_levels(&mut rng, 4),
            Profile::Sine { offset: 1.0, amplitude: 0.3, frequency: 1.1 },
            1.4,
        )
        .unwrap();
        let rho = random_state(&layout, 5);
        let p = AlternativeSet::standard("A", 2).unwrap().projector_op(1).unwrap();
        for t in [0.0, 0.3, 1.7, 4.0] {
            let direct = evolved_probability(&rho, &gen, &p, t).unwrap();
            let via = single_probability(&evolve(&rho, &gen, 0.0, t).unwrap(), &p).unwrap();
            assert!((direct - via).abs() < 1e-12);
        }
        let at0 = evolved_probability(&rho, &gen, &p, 0.0).unwrap();
        assert!((at0 - single_probability(&rho, &p).unwrap()).abs() < 1e-13);

        let frozen = EvolutionGenerator::zero(layout);
        for t in [0.5, 9.0] {
            assert!((evolved_probability(&rho, &frozen, &p, t).unwrap() - at0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_level_cosine_interference() {
        // Eigenbasis |±⟩, levels (E1, E2), state |0⟩, projector |0⟩⟨0|:
        // p(t) = 1/2 + 1/2 cos((E1 − E2) t).
        let s = FRAC_1_SQRT_2;
        let basis = vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]];
        let (e1, e2) = (1.3, -0.4);
        let gen = EvolutionGenerator::new(qubit(), basis, vec![e1, e2], Profile::Constant, 1.0).unwrap();
        let rho = make_density(&StateSpec::Pure(basis_vector(2, 0)), &qubit()).unwrap();
        let p0 = AlternativeSet::standard("A", 2).unwrap().projector_op(0).unwrap();
        for t in [0.0, 0.5, 1.0, 2.2] {
            let oracle = 0.5 + 0.5 * ((e1 - e2) * t).cos();
            assert!((evolved_probability(&rho, &gen, &p0, t).unwrap() - oracle).abs() < 1e-13);
        }
    }

    #[test]
    fn limit_modes() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a_basis = random_basis(&mut rng, 2);
        let basis = product_basis(&a_basis, &crate::tensor::standard_basis(2));
        let gen = EvolutionGenerator::new(layout.clone(), basis, vec![0.9, -1.1, 0.35, 1.7], Profile::Constant, 1.0).unwrap();
        let rho = random_state(&layout, 6);
        let p = AlternativeSet::standard("A", 2).unwrap().projector_op(0).unwrap();

        let slow = limit_probability(&rho, &gen, &p, LimitMode::Slow).unwrap();
        let tiny = gen.with_rate(1e-8).unwrap();
        assert!((evolved_probability(&rho, &tiny, &p, 1.0).unwrap() - slow).abs() < 1e-6);

        // Phase-averaging oracle: mean of the evolved probability over [T, 2T].
        let fast = limit_probability(&rho, &gen, &p, LimitMode::Fast).unwrap();
        let big = gen.with_rate(1e6).unwrap();
        let n = 4000;
        let mean = (0..n)
            .map(|i| evolved_probability(&rho, &big, &p, 1.0 + (i as f64 + 0.5) / n as f64).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - fast).abs() < 1e-3);

        // Non-degenerate levels: same as dephasing in the eigenbasis.
        let dephased = dephase(&rho, gen.basis()).unwrap();
        assert!((single_probability(&dephased, &p).unwrap() - fast).abs() < 1e-12);

        let diag = make_density(
            &StateSpec::Mixture(gen.basis().iter().enumerate().map(|(i, v)| (1.0 + i as f64, v.clone())).collect()),
            &layout,
        )
        .unwrap();
        let s = limit_probability(&diag, &gen, &p, LimitMode::Slow).unwrap();
        let f = limit_probability(&diag, &gen, &p, LimitMode::Fast).unwrap();
        assert!((s - f).abs() < 1e-12);
    }

    #[test]
    fn degenerate_levels_keep_inner_coherence() {
        // Levels depend on the alternative only: the fast limit dephases the
        // alternative factor and leaves the subject factor alone.
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let gen = EvolutionGenerator::diagonal(layout.clone(), vec![1.0, 1.0, -1.0, -1.0], Profile::Constant, 1.0).unwrap();
        let rho = random_state(&layout, 31);
        let avg = fast_limit_state(&rho, &gen).unwrap();
        let m = rho.matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i / 2 == j / 2 { m[(i, j)] } else { ZERO };
                assert!((avg.matrix()[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn post_decision_examples() {
        let layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gen = EvolutionGenerator::new(
            layout.clone(),
            random_basis(&mut rng, 4),
            random_levels(&mut rng, 4),
            Profile::Constant,
            1e-8,
        )
        .unwrap();
        let rho = random_state(&layout, 12);
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let same = post_decision_probability(&rho, &gen, &alts, 0, 1.0, 0, 1.0 + 1e-6).unwrap();
        assert!((same - 1.0).abs() < 1e-9);
        let other = post_decision_probability(&rho, &gen, &alts, 0, 1.0, 1, 1.5).unwrap();
        assert!(other.abs() < 1e-9);
        assert!(post_decision_probability(&rho, &gen, &alts, 0, 1.0, 1, 0.5).is_err());

        // Fast regime: dephasing-path oracle on the Lüders state.
        let fast = gen.with_rate(1e6).unwrap();
        let reset = luders_update(&evolve(&rho, &fast, 0.0, 1.0).unwrap(), &alts.projector_op(0).unwrap()).unwrap();
        let oracle = single_probability(&fast_limit_state(&reset, &fast).unwrap(), &alts.projector_op(1).unwrap()).unwrap();
        let n = 2000;
        let mean = (0..n)
            .map(|i| post_decision_probability(&rho, &fast, &alts, 0, 1.0, 1, 2.0 + i as f64 / n as f64).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - oracle).abs() < 1e-3);
    }

    #[test]
    fn impossible_conditioning_propagates() {
        let rho = make_density(&StateSpec::Pure(basis_vector(2, 1)), &qubit()).unwrap();
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let gen = EvolutionGenerator::zero(qubit());
        assert!(matches!(
            post_decision_probability(&rho, &gen, &alts, 0, 0.5, 0, 1.0),
            Err(Error::ImpossibleConditioning(_))
        ));
    }

    #[test]
    fn luders_probability_is_overlap_square() {
        let s = FRAC_1_SQRT_2;
        let pn = LocalOperator::on("A", ComplexMatrix::outer(&basis_vector(2, 0), &basis_vector(2, 0))).unwrap();
        let plus = vec![c(s, 0.0), c(s, 0.0)];
        let pm = LocalOperator::on("A", ComplexMatrix::outer(&plus, &plus)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let v = random_vector(&mut rng, 2);
            let rho = make_density(&StateSpec::Pure(v), &qubit()).unwrap();
            let ab = luders_probability(&rho, &pn, &pm).unwrap();
            let ba = luders_probability(&rho, &pm, &pn).unwrap();
            assert!((ab - 0.5).abs() < 1e-12);
            assert!((ba - 0.5).abs() < 1e-12);
            assert!((luders_probability(&rho, &pn, &pn).unwrap() - 1.0).abs() < 1e-12);
        }
        let p1 = LocalOperator::on("A", ComplexMatrix::outer(&basis_vector(2, 1), &basis_vector(2, 1))).unwrap();
        let rho = make_density(&StateSpec::Pure(vec![c(0.6, 0.0), c(0.8, 0.0)]), &qubit()).unwrap();
        assert!(luders_probability(&rho, &pn, &p1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn wigner_examples() {
        let layout = SpaceLayout::single("A", 3).unwrap();
        let rho = random_state(&layout, 40);
        let alts = AlternativeSet::standard("A", 3).unwrap();
        let p0 = alts.projector_op(0).unwrap();
        let p1 = alts.projector_op(1).unwrap();
        let single = single_probability(&rho, &p0).unwrap();
        assert!((wigner_probability(&rho, &p0, &p0).unwrap() - single).abs() < 1e-14);
        assert!(wigner_probability(&rho, &p0, &p1).unwrap().abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let b = random_basis(&mut rng, 3);
        let pb = LocalOperator::on("A", ComplexMatrix::outer(&b[1], &b[1])).unwrap();
        let w = wigner_probability(&rho, &p0, &pb).unwrap();
        let l = luders_probability(&rho, &p0, &pb).unwrap();
        assert!((w - l * single).abs() < 1e-12);
    }

    #[test]
    fn kirkwood_examples() {
        let alts = AlternativeSet::standard("A", 2).unwrap();
        let rho = make_density(&StateSpec::Mixture(vec![(0.3, basis_vector(2, 0)), (0.7, basis_vector(2, 1))]), &qubit()).unwrap();
        let k = kirkwood(&rho, &alts.projector_op(1).unwrap(), &alts.projector_op(1).unwrap()).unwrap();
        assert!((k - c(0.7, 0.0)).norm() < 1e-15);
        let k = kirkwood(&rho, &alts.projector_op(0).unwrap(), &alts.projector_op(1).unwrap()).unwrap();
        assert!(k.norm() < 1e-15);

        // |A⟩ = |0⟩, |B⟩ = |+⟩, ρ = |+i⟩⟨+i|:
        // Tr(ρ P_B P_A) = ⟨+i|B⟩⟨B|A⟩⟨A|+i⟩ = (1 − i)/2 · 1/√2 · 1/√2 = (1 − i)/4.
        let s = FRAC_1_SQRT_2;
        let pa = alts.projector_op(0).unwrap();
        let plus = vec![c(s, 0.0), c(s, 0.0)];
        let pb = LocalOperator::on("A", ComplexMatrix::outer(&plus, &plus)).unwrap();
        let rho = make_density(&StateSpec::Pure(vec![c(s, 0.0), c(0.0, s)]), &qubit()).unwrap();
        let k = kirkwood(&rho, &pb, &pa).unwrap();
        assert!((k - c(0.25, -0.25)).norm() < 1e-15);
        assert!((kirkwood(&rho, &pa, &pb).unwrap() - k.conj()).norm() < 1e-15);
    }

    fn three_factor() -> SpaceLayout {
        SpaceLayout::new([("A", 2), ("B", 2), ("S", 2)]).unwrap()
    }

    fn protocol(seed: u64, real: bool, rate: f64) -> SuccessiveProtocol {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut basis = |d: usize| {
            let b = random_basis(&mut rng, d);
            if real {
                // Real orthonormal basis: eigenvectors of a real symmetric matrix.
                let h = ComplexMatrix::from_fn(d, d, |i, j| c(((i * 7 + j * 3 + seed as usize) % 5) as f64 + (i + j) as f64 * 0.1, 0.0));
                let h = &h + &h.adjoint();
                let (_, v) = h.hermitian_eigen().unwrap();
                v.into_iter()
                    .map(|x| {
                        let ph = x.iter().find(|z| z.norm() > 1e-8).map(|z| z.conj() / z.norm()).unwrap();
                        x.into_iter().map(|z| z * ph).collect()
                    })
                    .collect()
            } else {
                b
            }
        };
        let as_layout = SpaceLayout::new([("A", 2), ("S", 2)]).unwrap();
        let bs_layout = SpaceLayout::new([("B", 2), ("S", 2)]).unwrap();
        let ga = EvolutionGenerator::new(as_layout, basis(4), vec![1.0, -0.7, 0.4, 1.9], Profile::Constant, rate).unwrap();
        let gb = EvolutionGenerator::new(bs_layout, basis(4), vec![-1.2, 0.3, 0.8, 2.4], Profile::Constant, rate).unwrap();
        SuccessiveProtocol::new(
            Stage {
                alternatives: AlternativeSet::standard("A", 2).unwrap(),
                generator: ga,
                window: DecisionWindow::new(0.0, 1.0).unwrap(),
            },
            Stage {
                alternatives: AlternativeSet::standard("B", 2).unwrap(),
                generator: gb,
                window: DecisionWindow::new(1.5, 1.0).unwrap(),
            },
        )
        .unwrap()
    }

    #[test]
    fn windows_must_not_overlap() {
        let p = protocol(1, false, 1.0);
        let mut late = p.first().clone();
        late.window = DecisionWindow::new(2.0, 1.0).unwrap();
        assert!(matches!(
            SuccessiveProtocol::new(late, p.second().clone()),
            Err(Error::OverlappingWindows(_))
        ));
    }

    #[test]
    fn joint_probability_is_real_and_marginalizes() {
        let p = protocol(3, false, 1.0);
        let rho = random_state(&three_factor(), 77);
        for t in [0.5, 2.0, 3.0] {
            let mut total = 0.0;
            for n in 0..2 {
                let mut marginal = 0.0;
                for k in 0..2 {
                    let rec = joint_probability(&rho, &p, n, k, t).unwrap();
                    assert!(rec.imaginary <= REAL_TOL);
                    marginal += rec.value;
                }
                let alone = single_probability(&p.evolve(&rho, 0.0, t).unwrap(), &p.first().alternatives.projector_op(n).unwrap()).unwrap();
                assert!((marginal - alone).abs() < 1e-10);
                total += marginal;
            }
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn uncorrelated_state_factorizes_at_start() {
        let p = protocol(4, false, 1.0);
        let ra = random_state(&SpaceLayout::single("A", 2).unwrap(), 1);
        let rb = random_state(&SpaceLayout::single("B", 2).unwrap(), 2);
        let rs = random_state(&SpaceLayout::single("S", 2).unwrap(), 3);
        let rho = ra.product(&rb).unwrap().product(&rs).unwrap();
        for n in 0..2 {
            for k in 0..2 {
                let joint = joint_probability(&rho, &p, n, k, 0.0).unwrap().value;
                let pa = single_probability(&ra, &p.first().alternatives.projector_op(n).unwrap()).unwrap();
                let pb = single_probability(&rb, &p.second().alternatives.projector_op(k).unwrap()).unwrap();
                assert!((joint - pa * pb).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn slow_regime_uses_initial_state() {
        let p = protocol(5, false, 1e-8);
        let rho = random_state(&three_factor(), 8);
        let rho_ab = rho.reduced(&["A", "B"]).unwrap();
        let op = LocalOperator::disjoint_product(&[
            &p.second().alternatives.projector_op(1).unwrap(),
            &p.first().alternatives.projector_op(0).unwrap(),
        ])
        .unwrap();
        let frozen = rho_ab.expectation(&op).unwrap().re;
        assert!((joint_probability(&rho, &p, 0, 1, 3.0).unwrap().value - frozen).abs() < 1e-6);
    }

    #[test]
    fn question_order_matters() {
        let p = protocol(6, false, 1.0);
        let rho = random_state(&three_factor(), 19);
        let ab = joint_probability(&rho, &p, 0, 0, 3.0).unwrap().value;
        let ba = joint_probability(&rho, &p.swapped(), 0, 0, 3.0).unwrap().value;
        assert!((ab - ba).abs() > 0.01, "gap {}", (ab - ba).abs());
    }

    #[test]
    fn time_reversal_for_real_data() {
        let p = protocol(7, true, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let items = (0..3)
            .map(|_| (rng.random_range(0.1..1.0), (0..8).map(|_| c(rng.random_range(-1.0..1.0), 0.0)).collect()))
            .collect();
        let rho = make_density(&StateSpec::Mixture(items), &three_factor()).unwrap();
        let mirror = p.mirrored().unwrap();
        for t in [0.7, 2.0, 3.0] {
            for n in 0..2 {
                for k in 0..2 {
                    let fwd = joint_probability(&rho, &p, n, k, t).unwrap().value;
                    let back = joint_probability(&rho, &mirror, k, n, -t).unwrap().value;
                    assert!((fwd - back).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn behavioral_joint_reduces_and_normalizes() {
        let p = protocol(8, false, 1.0);
        let layout = SpaceLayout::new([("A", 2), ("B", 2), ("S", 2), ("SA", 1), ("SB", 1)]).unwrap();
        let rho = random_state(&layout, 50);
        let ua = FeelingAmplitudes::unit("SA", 2, 1).unwrap();
        let ub = FeelingAmplitudes::unit("SB", 2, 1).unwrap();
        for n in 0..2 {
            for k in 0..2 {
                let b = behavioral_joint(&rho, &p, &ua, &ub, n, k, 3.0).unwrap();
                let j = joint_probability(&rho, &p, n, k, 3.0).unwrap().value;
                assert!((b - j).abs() < 1e-12);
            }
        }

        let layout = SpaceLayout::new([("A", 2), ("B", 2), ("S", 2), ("SA", 2), ("SB", 3)]).unwrap();
        let rho = random_state(&layout, 51);
        let fa = crate::measures::sample_feelings("SA", 2, 2, 1, Default::default()).unwrap();
        let fb = crate::measures::sample_feelings("SB", 2, 3, 2, Default::default()).unwrap();
        let total: f64 = (0..2)
            .flat_map(|n| (0..2).map(move |k| (n, k)))
            .map(|(n, k)| behavioral_joint(&rho, &p, &fa, &fb, n, k, 2.5).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn behavioral_joint_factorizes_for_product_state() {
        let p = protocol(9, false, 1.0);
        let parts = [("A", 2), ("B", 2), ("S", 2), ("SA", 2), ("SB", 2)];
        let states: Vec<DensityOperator> = parts
            .iter()
            .enumerate()
            .map(|(i, (l, d))| random_state(&SpaceLayout::single(*l, *d).unwrap(), 60 + i as u64))
            .collect();
        let mut rho = states[0].clone();
        for s in &states[1..] {
            rho = rho.product(s).unwrap();
        }
        let fa = crate::measures::sample_feelings("SA", 2, 2, 3, Default::default()).unwrap();
        let fb = crate::measures::sample_feelings("SB", 2, 2, 4, Default::default()).unwrap();
        let a_side = states[0].product(&states[3]).unwrap();
        let b_side = states[1].product(&states[4]).unwrap();
        let pa = prospect_probabilities(&a_side, &p.first().alternatives, &fa).unwrap();
        let pb = prospect_probabilities(&b_side, &p.second().alternatives, &fb).unwrap();
        for n in 0..2 {
            for k in 0..2 {
                let joint = behavioral_joint(&rho, &p, &fa, &fb, n, k, 0.0).unwrap();
                assert!((joint - pa[n] * pb[k]).abs() < 1e-12);
            }
        }
    }
}
