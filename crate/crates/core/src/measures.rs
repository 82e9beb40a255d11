//! Alternatives, feeling amplitudes and prospect operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::state::{DensityOperator, BASIS_TOL};
use crate::tensor::{
    c, inner, orthonormality_deviation, ComplexMatrix, LocalOperator, SpaceLayout,
};

/// Mutually orthonormal alternative vectors living in one labeled factor.
/// They need not span the factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeSet {
    label: String,
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl AlternativeSet {
    pub fn new(label: impl Into<String>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let label = label.into();
        let dim = vectors.first().map(Vec::len).ok_or_else(|| {
            Error::InvalidConfig(format!("alternative set {label} is empty"))
        })?;
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "alternative vectors of {label} have unequal lengths"
            )));
        }
        let dev = orthonormality_deviation(&vectors);
        if dev > BASIS_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { label, dim, vectors })
    }

    /// The standard basis of a `dim`-dimensional factor.
    pub fn standard(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(label, crate::tensor::standard_basis(dim))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, n: usize) -> Result<&[Complex64]> {
        self.vectors
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: n,
                size: self.vectors.len(),
            })
    }

    /// `P(A_n)` as an operator on this set's factor.
    pub fn projector_op(&self, n: usize) -> Result<LocalOperator> {
        LocalOperator::on(self.label.clone(), projector(self, n)?)
    }
}

/// `|A_n⟩⟨A_n|` (zero-based `n`).
pub fn projector(alts: &AlternativeSet, n: usize) -> Result<ComplexMatrix> {
    let v = alts.vector(n)?;
    Ok(ComplexMatrix::outer(v, v))
}

/// How feeling amplitudes are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeelingDistribution {
    /// Independent normal real and imaginary parts with mean 0 and the given
    /// standard deviation.
    Gaussian { sigma: f64 },
    /// Fixed modulus with a uniform random phase.
    UniformModulus { modulus: f64 },
}

impl Default for FeelingDistribution {
    fn default() -> Self {
        FeelingDistribution::Gaussian { sigma: 1.0 }
    }
}

/// Random amplitudes `b_{nα}`: row `n` selects the alternative, column `α`
/// the subject basis vector. Rows are not normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FeelingAmplitudes {
    subject: String,
    b: ComplexMatrix,
    seed: Option<u64>,
}

impl FeelingAmplitudes {
    pub fn new(subject: impl Into<String>, b: ComplexMatrix) -> Result<Self> {
        if b.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("feeling amplitude".into()));
        }
        Ok(Self {
            subject: subject.into(),
            b,
            seed: None,
        })
    }

    /// Unit amplitude on the first subject basis vector for every alternative.
    pub fn unit(subject: impl Into<String>, n_alts: usize, subject_dim: usize) -> Result<Self> {
        let b = ComplexMatrix::from_fn(n_alts, subject_dim, |_, a| {
            if a == 0 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        Self::new(subject, b)
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn amplitudes(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n_alts(&self) -> usize {
        self.b.rows()
    }

    pub fn subject_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn row(&self, n: usize) -> Vec<Complex64> {
        (0..self.b.cols()).map(|a| self.b[(n, a)]).collect()
    }

    /// `|z_n⟩ = Σ_α b_{nα} |α⟩`.
    pub fn z(&self, n: usize) -> Result<Vec<Complex64>> {
        if n >= self.n_alts() {
            return Err(Error::IndexOutOfRange {
                index: n,
                size: self.n_alts(),
            });
        }
        Ok(self.row(n))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            b: self.b.scale(c(s, 0.0)),
            ..self.clone()
        }
    }

    fn with_rows(&self, rows: Vec<Vec<Complex64>>) -> Self {
        let b = ComplexMatrix::from_fn(self.b.rows(), self.b.cols(), |n, a| rows[n][a]);
        Self { b, ..self.clone() }
    }
}

/// Seeded draw of an `n_alts × subject_dim` amplitude table.
pub fn sample_feelings(
    subject: impl Into<String>,
    n_alts: usize,
    subject_dim: usize,
    seed: u64,
    distribution: FeelingDistribution,
) -> Result<FeelingAmplitudes> {
    if n_alts == 0 || subject_dim == 0 {
        return Err(Error::InvalidConfig("feeling table needs positive dimensions".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n_alts * subject_dim);
    match distribution {
        FeelingDistribution::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::InvalidConfig(format!("gaussian feelings: {e}")))?;
            for _ in 0..n_alts * subject_dim {
                data.push(c(normal.sample(&mut rng), normal.sample(&mut rng)));
            }
        }
        FeelingDistribution::UniformModulus { modulus } => {
            if !modulus.is_finite() || modulus < 0.0 {
                return Err(Error::InvalidConfig(format!("feeling modulus {modulus}")));
            }
            for _ in 0..n_alts * subject_dim {
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                data.push(Complex64::from_polar(modulus, theta));
            }
        }
    }
    let b = ComplexMatrix::new(n_alts, subject_dim, data)?;
    Ok(FeelingAmplitudes {
        subject: subject.into(),
        b,
        seed: Some(seed),
    })
}

/// `P(A_n) ⊗ |z_n⟩⟨z_n|` on the (alternative, subject) factor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectOperator {
    operator: LocalOperator,
    alternative: usize,
}

impl ProspectOperator {
    pub fn alternative(&self) -> usize {
        self.alternative
    }

    pub fn operator(&self) -> &LocalOperator {
        &self.operator
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.operator.matrix()
    }
}

pub fn prospect_operator(
    alts: &AlternativeSet,
    n: usize,
    feelings: &FeelingAmplitudes,
) -> Result<ProspectOperator> {
    if feelings.n_alts() != alts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feeling rows for {} alternatives",
            feelings.n_alts(),
            alts.len()
        )));
    }
    let p = projector(alts, n)?;
    let z = feelings.z(n)?;
    let layout = SpaceLayout::new([
        (alts.label(), alts.dim()),
        (feelings.subject(), feelings.subject_dim()),
    ])?;
    let m = crate::tensor::tensor_product(&p, &ComplexMatrix::outer(&z, &z));
    Ok(ProspectOperator {
        operator: LocalOperator::new(layout, m)?,
        alternative: n,
    })
}

/// All prospect operators of the set, in alternative order.
pub fn prospect_family(alts: &AlternativeSet, feelings: &FeelingAmplitudes) -> Result<Vec<ProspectOperator>> {
    (0..alts.len()).map(|n| prospect_operator(alts, n, feelings)).collect()
}

/// `|Tr(ρ Σ_n P(A_n z_n)) − 1|`.
pub fn check_resolution_weak(state: &DensityOperator, prospects: &[ProspectOperator]) -> Result<f64> {
    Ok((prospect_weight(state, prospects)? - 1.0).abs())
}

fn prospect_weight(state: &DensityOperator, prospects: &[ProspectOperator]) -> Result<f64> {
    let mut total = 0.0;
    for p in prospects {
        total += state.expectation(p.operator())?.re;
    }
    Ok(total)
}

/// Rescales all amplitudes by one positive scalar so that the prospect
/// probabilities sum to one in `state`.
pub fn normalize_feelings(
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
) -> Result<FeelingAmplitudes> {
    let w = prospect_weight(state, &prospect_family(alts, feelings)?)?;
    if !(w > 1e-300) || !w.is_finite() {
        return Err(Error::ZeroWeight);
    }
    Ok(feelings.scaled(1.0 / w.sqrt()))
}

/// Normalization policy applied to feelings before a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// One global scalar; only the prospect probabilities are normalized.
    Scalar,
    /// Rational fractions and prospect probabilities both sum to one, so the
    /// attraction factors cancel. See [`balance_feelings`].
    #[default]
    Balanced,
}

pub fn normalize_with(
    policy: Normalization,
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
) -> Result<FeelingAmplitudes> {
    match policy {
        Normalization::Scalar => normalize_feelings(state, alts, feelings),
        Normalization::Balanced => balance_feelings(state, alts, feelings),
    }
}

/// Per-alternative subject matrix `G_n[α][β] = ⟨α A_n|ρ|A_n β⟩`.
pub(crate) fn subject_blocks(
    state: &DensityOperator,
    alts: &AlternativeSet,
    subject: &str,
) -> Result<Vec<ComplexMatrix>> {
    let keep = [alts.label(), subject];
    let target = SpaceLayout::new([
        (alts.label(), alts.dim()),
        (
            subject,
            state
                .layout()
                .dim_of(subject)
                .ok_or_else(|| Error::Layout(format!("state has no factor {subject}")))?,
        ),
    ])?;
    let reduced = state.reduced(&keep)?;
    // Reorder into (alternative, subject) by embedding the identity in the
    // target order and reading the reduced matrix through it.
    let m = reorder(reduced.matrix(), reduced.layout(), &target)?;
    let ds = target.factors()[1].1;
    let da = alts.dim();
    alts.vectors()
        .iter()
        .map(|v| {
            Ok(ComplexMatrix::from_fn(ds, ds, |a, b| {
                let mut acc = c(0.0, 0.0);
                for i in 0..da {
                    for j in 0..da {
                        acc += v[i].conj() * m[(i * ds + a, j * ds + b)] * v[j];
                    }
                }
                acc
            }))
        })
        .collect()
}

/// Matrix entries of `m` (on `from`) re-indexed into the factor order of `to`.
pub(crate) fn reorder(m: &ComplexMatrix, from: &SpaceLayout, to: &SpaceLayout) -> Result<ComplexMatrix> {
    if from == to {
        return Ok(m.clone());
    }
    let d = to.total_dim();
    if from.total_dim() != d || from.len() != to.len() {
        return Err(Error::Layout(format!("cannot reorder {from} into {to}")));
    }
    let map: Vec<usize> = (0..d)
        .map(|idx| {
            let digits = to.digits(idx);
            let mut from_digits = vec![0; from.len()];
            for (k, (label, _)) in to.factors().iter().enumerate() {
                match from.position(label) {
                    Some(p) => from_digits[p] = digits[k],
                    None => return usize::MAX,
                }
            }
            from.compose(&from_digits)
        })
        .collect();
    if map.contains(&usize::MAX) {
        return Err(Error::Layout(format!("cannot reorder {from} into {to}")));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]))
}

/// Rescales feelings so that both the rational fractions and the prospect
/// probabilities sum to one, hence the attraction factors sum to zero.
///
/// Each row `b_n` is split along the eigenspaces of the off-diagonal part
/// `K_n = G_n − diag(G_n)` into positive, negative and null components. The
/// attraction factor `q_n = b_n† K_n b_n` then separates into a positive and
/// a negative sum, `Q₊ + Q₋`. Positive components are multiplied by
/// `(−Q₋/Q₊)^{1/4}` and negative ones by its inverse, which makes `ΣQ = 0`,
/// and a final global scalar fixes `Σf = 1`. Already balanced feelings only
/// receive the global scalar.
pub fn balance_feelings(
    state: &DensityOperator,
    alts: &AlternativeSet,
    feelings: &FeelingAmplitudes,
) -> Result<FeelingAmplitudes> {
    if feelings.n_alts() != alts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feeling rows for {} alternatives",
            feelings.n_alts(),
            alts.len()
        )));
    }
    let blocks = subject_blocks(state, alts, feelings.subject())?;
    let ds = feelings.subject_dim();
    let mut parts = Vec::with_capacity(alts.len());
    let (mut q_pos, mut q_neg, mut f_total) = (0.0, 0.0, 0.0);
    for (n, g) in blocks.iter().enumerate() {
        let b = feelings.row(n);
        let k = ComplexMatrix::from_fn(ds, ds, |a, bb| if a == bb { c(0.0, 0.0) } else { g[(a, bb)] });
        let (vals, vecs) = k.hermitian_eigen()?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = 1e-13 * scale.max(1e-300);
        let mut pos = vec![c(0.0, 0.0); ds];
        let mut neg = vec![c(0.0, 0.0); ds];
        let mut null = vec![c(0.0, 0.0); ds];
        for (lam, v) in vals.iter().zip(&vecs) {
            let coef = inner(v, &b);
            let target = if *lam > cut {
                q_pos += lam * coef.norm_sqr();
                &mut pos
            } else if *lam < -cut {
                q_neg += lam * coef.norm_sqr();
                &mut neg
            } else {
                &mut null
            };
            for (t, x) in target.iter_mut().zip(v) {
                *t += coef * x;
            }
        }
        f_total += (0..ds).map(|a| b[a].norm_sqr() * g[(a, a)].re).sum::<f64>();
        parts.push((pos, neg, null));
    }
    let q_total = q_pos + q_neg;
    let already = q_total.abs() <= 1e-14 * (f_total.abs() + q_pos - q_neg).max(1e-300);
    let rows: Vec<Vec<Complex64>> = if already {
        (0..alts.len()).map(|n| feelings.row(n)).collect()
    } else {
        if q_pos <= 0.0 || q_neg >= 0.0 {
            return Err(Error::Infeasible(format!(
                "attraction factors cannot cancel: positive part {q_pos:e}, negative part {q_neg:e}"
            )));
        }
        let r = (-q_neg / q_pos).powf(0.25);
        parts
            .into_iter()
            .map(|(pos, neg, null)| {
                (0..ds)
                    .map(|a| pos[a] * r + neg[a] / r + null[a])
                    .collect()
            })
            .collect()
    };
    normalize_feelings(state, alts, &feelings.with_rows(rows))
}
