//! Decision states and their self-similar unitary evolution.
//!
//! A generator is declared by a fixed orthonormal eigenbasis `|u⟩` and real
//! eigenvalue functions `E_u(t, g) = g · ε_u · h(t)`. Because the eigenbasis
//! never moves, the generator commutes with its own time integral at every
//! instant, and the evolution operator is diagonal in that basis with entries
//! `exp(-i ∫ E_u dt)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::tensor::{
    c, embed_vector, orthonormality_deviation, reduce, standard_basis, trace_product,
    ComplexMatrix, LocalOperator, SpaceLayout, STRICT_TOL,
};

/// Eigenvalues below this floor reject a candidate density operator.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Orthonormality tolerance for eigenbases and measurement bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Semi-positive, trace-one operator on a labeled decision space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    layout: SpaceLayout,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, layout: SpaceLayout) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on layout {layout}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STRICT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > STRICT_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = matrix
            .hermitian_eigenvalues()?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < EIGENVALUE_FLOOR {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix, layout })
    }

    /// Skips validation; callers guarantee the result of a trace- and
    /// positivity-preserving map applied to a valid state.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, layout: SpaceLayout) -> Self {
        debug_assert_eq!(matrix.rows(), layout.total_dim());
        Self { matrix, layout }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reduced state on the listed factors (identity if all are kept).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let layout = self.layout.restrict(keep)?;
        let m = reduce(&self.matrix, &self.layout, keep)?;
        Ok(Self::from_trusted(m, layout))
    }

    /// `Tr(ρ · O)` with `O` tensored with identities on the remaining factors.
    /// The state is first reduced onto the operator's factors.
    pub fn expectation(&self, op: &LocalOperator) -> Result<Complex64> {
        let labels: Vec<&str> = op.layout().labels().collect();
        let reduced = self.reduced(&labels)?;
        let embedded = op.embed(reduced.layout())?;
        trace_product(reduced.matrix(), &embedded)
    }

    /// Tensor product of states on disjoint factors.
    pub fn product(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let factors: Vec<(String, usize)> = self
            .layout
            .factors()
            .iter()
            .chain(other.layout.factors())
            .cloned()
            .collect();
        let layout = SpaceLayout::new(factors)?;
        Ok(Self::from_trusted(
            crate::tensor::tensor_product(&self.matrix, &other.matrix),
            layout,
        ))
    }
}

/// Input for [`make_density`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Pure(Vec<Complex64>),
    /// Weighted mixture of (not necessarily normalized) pure vectors.
    Mixture(Vec<(f64, Vec<Complex64>)>),
}

/// Builds a normalized density operator from a pure vector or a mixture.
pub fn make_density(spec: &StateSpec, layout: &SpaceLayout) -> Result<DensityOperator> {
    let dim = layout.total_dim();
    let components: Vec<(f64, &Vec<Complex64>)> = match spec {
        StateSpec::Pure(v) => vec![(1.0, v)],
        StateSpec::Mixture(items) => items.iter().map(|(w, v)| (*w, v)).collect(),
    };
    if components.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights);
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (w, v) in components {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state vector of length {} on layout {layout}",
                v.len()
            )));
        }
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroVector);
        }
        if w == 0.0 {
            continue;
        }
        let outer = ComplexMatrix::outer(v, v).scale(c(w / (total * n2), 0.0));
        m = &m + &outer;
    }
    DensityOperator::new(symmetrized(&m), layout.clone())
}

fn symmetrized(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}

/// Time profile `h(t)` shared by all eigenvalue functions of a generator.
#[derive(Clone)]
pub enum Profile {
    /// `h ≡ 1`.
    Constant,
    /// `h(t) = offset + slope · t`.
    Linear { offset: f64, slope: f64 },
    /// `h(t) = offset + amplitude · sin(frequency · t)`.
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant => write!(f, "Constant"),
            Profile::Linear { offset, slope } => write!(f, "Linear({offset} + {slope} t)"),
            Profile::Sine {
                offset,
                amplitude,
                frequency,
            } => write!(f, "Sine({offset} + {amplitude} sin({frequency} t))"),
            Profile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Linear { offset, slope } => offset + slope * t,
            Profile::Sine {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * t).sin(),
            Profile::Custom(h) => h(t),
        }
    }

    /// `∫_{t0}^{t1} h(t) dt`, closed form for the constant profile and
    /// adaptive quadrature otherwise.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        match self {
            Profile::Constant => {
                if !(t0.is_finite() && t1.is_finite()) {
                    return Err(Error::NonFinite(format!("window [{t0}, {t1}]")));
                }
                Ok(t1 - t0)
            }
            _ => {
                let tol = Tolerance {
                    abs: 1e-12,
                    rel: 1e-14,
                    ..Tolerance::default()
                };
                Ok(quadrature::integrate(|t| self.value(t), t0, t1, tol)?.value)
            }
        }
    }
}

/// Decision interval `[start, start + duration]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionWindow {
    start: f64,
    duration: f64,
}

impl DecisionWindow {
    pub fn new(start: f64, duration: f64) -> Result<Self> {
        if !start.is_finite() || !duration.is_finite() || duration <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "decision window needs a positive finite duration, got start {start}, duration {duration}"
            )));
        }
        Ok(Self { start, duration })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// `n` equally spaced times covering the window, endpoints included.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .map(|k| self.start + self.duration * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Self-similar evolution generator in a fixed eigenbasis.
#[derive(Debug, Clone)]
pub struct EvolutionGenerator {
    layout: SpaceLayout,
    basis: Vec<Vec<Complex64>>,
    levels: Vec<f64>,
    profile: Profile,
    rate: f64,
    // Columns are the eigenvectors.
    change_of_basis: ComplexMatrix,
}

impl EvolutionGenerator {
    pub fn new(
        layout: SpaceLayout,
        basis: Vec<Vec<Complex64>>,
        levels: Vec<f64>,
        profile: Profile,
        rate: f64,
    ) -> Result<Self> {
        let dim = layout.total_dim();
        if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "eigenbasis must hold {dim} vectors of length {dim} for layout {layout}"
            )));
        }
        if levels.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalue constants for dimension {dim}",
                levels.len()
            )));
        }
        if levels.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("eigenvalue constant".into()));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "rate must be finite and non-negative, got {rate}"
            )));
        }
        let dev = orthonormality_deviation(&basis);
        if dev > BASIS_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        let change_of_basis = ComplexMatrix::from_fn(dim, dim, |i, j| basis[j][i]);
        Ok(Self {
            layout,
            basis,
            levels,
            profile,
            rate,
            change_of_basis,
        })
    }

    /// Generator diagonal in the standard composite basis.
    pub fn diagonal(layout: SpaceLayout, levels: Vec<f64>, profile: Profile, rate: f64) -> Result<Self> {
        let basis = standard_basis(layout.total_dim());
        Self::new(layout, basis, levels, profile, rate)
    }

    pub fn zero(layout: SpaceLayout) -> Self {
        let dim = layout.total_dim();
        Self::diagonal(layout, vec![0.0; dim], Profile::Constant, 0.0)
            .expect("zero generator is always valid")
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(
            self.layout.clone(),
            self.basis.clone(),
            self.levels.clone(),
            self.profile.clone(),
            rate,
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `E_u(t, g)` for basis label `u` at the generator's own rate.
    pub fn eigenvalue(&self, label: usize, t: f64) -> f64 {
        self.eigenvalue_at_rate(label, t, self.rate)
    }

    pub fn eigenvalue_at_rate(&self, label: usize, t: f64, rate: f64) -> f64 {
        rate * self.levels[label] * self.profile.value(t)
    }

    /// Checks the slow and fast rate limits at `g = 1e-6` and `g = 1e6`:
    /// every eigenvalue must be below `1e-4` in the first case and above
    /// `1e2` in the second, at sampled times of the window. Labels with a
    /// vanishing constant do not satisfy the fast limit.
    pub fn rate_limits_hold(&self, window: &DecisionWindow) -> bool {
        let times = window.samples(9);
        (0..self.dim()).all(|u| {
            times.iter().all(|&t| {
                let slow = self.eigenvalue_at_rate(u, t, 1e-6).abs();
                let fast = self.eigenvalue_at_rate(u, t, 1e6).abs();
                slow.is_finite() && fast.is_finite() && slow <= 1e-4 && fast >= 1e2
            })
        })
    }

    /// Accumulated phase angles `∫_{t0}^{t1} E_u dt` for all labels.
    pub fn phase_angles(&self, t0: f64, t1: f64) -> Result<Vec<f64>> {
        let h = self.profile.integral(t0, t1)?;
        let angles: Vec<f64> = self.levels.iter().map(|e| self.rate * e * h).collect();
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("eigenvalue integral on [{t0}, {t1}]")));
        }
        Ok(angles)
    }

    /// `exp(-i ∫_{t0}^{t1} E_label dt)`.
    pub fn phase(&self, label: usize, t0: f64, t1: f64) -> Result<Complex64> {
        if label >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: label,
                size: self.dim(),
            });
        }
        let h = self.profile.integral(t0, t1)?;
        let angle = self.rate * self.levels[label] * h;
        if !angle.is_finite() {
            return Err(Error::NonFinite(format!("eigenvalue integral on [{t0}, {t1}]")));
        }
        Ok(Complex64::from_polar(1.0, -angle))
    }

    /// The same generator acting on a larger layout: identity on every
    /// factor of `target` that this generator does not touch. Eigenvalues do
    /// not depend on the added factors.
    pub fn embed(&self, target: &SpaceLayout) -> Result<Self> {
        if *target == self.layout {
            return Ok(self.clone());
        }
        let own: Vec<&str> = self.layout.labels().collect();
        let rest_dim: usize = target
            .complement(&own)
            .iter()
            .map(|l| target.dim_of(l).unwrap_or(1))
            .product();
        if rest_dim * self.dim() != target.total_dim() {
            return Err(Error::Layout(format!(
                "generator on {} does not fit into {target}",
                self.layout
            )));
        }
        let mut basis = Vec::with_capacity(target.total_dim());
        let mut levels = Vec::with_capacity(target.total_dim());
        for (u, v) in self.basis.iter().enumerate() {
            for r in 0..rest_dim {
                basis.push(embed_vector(v, &self.layout, target, r)?);
                levels.push(self.levels[u]);
            }
        }
        Self::new(target.clone(), basis, levels, self.profile.clone(), self.rate)
    }

    /// `H(t) = Σ_u E_u(t) |u⟩⟨u|`.
    pub fn matrix_at(&self, t: f64) -> ComplexMatrix {
        let e: Vec<f64> = (0..self.dim()).map(|u| self.eigenvalue(u, t)).collect();
        self.from_eigen_values(&e)
    }

    fn from_eigen_values(&self, values: &[f64]) -> ComplexMatrix {
        let d = ComplexMatrix::real_diag(values);
        &(&self.change_of_basis * &d) * &self.change_of_basis.adjoint()
    }

    /// Matrix of `⟨u|ρ|v⟩` in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.change_of_basis.adjoint() * m) * &self.change_of_basis
    }

    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.change_of_basis * m) * &self.change_of_basis.adjoint()
    }
}

/// Time-dependent generator that can be sampled and integrated; used by the
/// self-similarity check.
pub trait SampledGenerator {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> ComplexMatrix;
    fn integral(&self, t0: f64, t1: f64) -> Result<ComplexMatrix>;
}

impl SampledGenerator for EvolutionGenerator {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        self.matrix_at(t)
    }

    fn integral(&self, t0: f64, t1: f64) -> Result<ComplexMatrix> {
        Ok(self.from_eigen_values(&self.phase_angles(t0, t1)?))
    }
}

/// Adaptor for a generator given as a raw time-dependent matrix. It exists
/// so that the self-similarity check can be exercised on generators whose
/// eigenvectors move; it cannot drive evolution.
pub struct RawGenerator {
    dim: usize,
    f: Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
}

impl RawGenerator {
    /// Validates shape and hermiticity at a few probe times.
    pub fn new(dim: usize, f: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Result<Self> {
        for t in [0.0, 0.37, 1.0, 2.5] {
            let m = f(t);
            if m.rows() != dim || !m.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "raw generator returned {}x{} for dimension {dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            let dev = m.hermitian_deviation();
            if dev > STRICT_TOL {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(Self { dim, f: Box::new(f) })
    }
}

impl SampledGenerator for RawGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        (self.f)(t)
    }

    fn integral(&self, t0: f64, t1: f64) -> Result<ComplexMatrix> {
        let tol = Tolerance::absolute(1e-13);
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let re = quadrature::integrate(|t| (self.f)(t)[(i, j)].re, t0, t1, tol)?.value;
                let im = quadrature::integrate(|t| (self.f)(t)[(i, j)].im, t0, t1, tol)?.value;
                out[(i, j)] = c(re, im);
            }
        }
        Ok(out)
    }
}

/// Samples `‖[H(t), ∫_0^t H dt']‖` across the window and reports whether it
/// stays below `1e-10` relative to `1 + ‖H‖·‖∫H‖` (max-entry norms).
pub fn check_self_similarity(gen: &dyn SampledGenerator, window: &DecisionWindow) -> bool {
    window.samples(9).into_iter().all(|t| {
        let h = gen.at(t);
        let Ok(int) = gen.integral(0.0, t) else {
            return false;
        };
        let Ok(comm) = h.commutator(&int) else {
            return false;
        };
        comm.max_abs() <= 1e-10 * (1.0 + h.max_abs() * int.max_abs())
    })
}

/// Free-function form of [`EvolutionGenerator::phase`].
pub fn phase(gen: &EvolutionGenerator, label: usize, t0: f64, t1: f64) -> Result<Complex64> {
    gen.phase(label, t0, t1)
}

fn check_layout(state: &DensityOperator, gen: &EvolutionGenerator) -> Result<()> {
    if state.layout() != gen.layout() {
        return Err(Error::Layout(format!(
            "generator on {} cannot act on a state on {}",
            gen.layout(),
            state.layout()
        )));
    }
    Ok(())
}

/// Propagates `ρ` from `t0` to `t1` (either direction) in the generator
/// eigenbasis: `ρ'_{uv} = φ_u ρ_{uv} conj(φ_v)`.
pub fn evolve(state: &DensityOperator, gen: &EvolutionGenerator, t0: f64, t1: f64) -> Result<DensityOperator> {
    check_layout(state, gen)?;
    let angles = gen.phase_angles(t0, t1)?;
    let phases: Vec<Complex64> = angles.iter().map(|a| Complex64::from_polar(1.0, -a)).collect();
    let mut rho = gen.to_eigenbasis(state.matrix());
    let dim = gen.dim();
    for u in 0..dim {
        for v in 0..dim {
            rho[(u, v)] *= phases[u] * phases[v].conj();
        }
    }
    Ok(DensityOperator::from_trusted(
        gen.from_eigenbasis(&rho),
        state.layout().clone(),
    ))
}

/// Mean of `exp(-i ω s)` over `s ∈ [a, b]` with the phase origin at `s = 0`.
fn mean_phase_constant(omega: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let x = omega * len;
    let start = Complex64::from_polar(1.0, -omega * a);
    let factor = if x.abs() < 1e-6 {
        c(1.0 - x * x / 6.0, -x / 2.0)
    } else {
        // (1 - e^{-ix}) / (i x)
        (c(1.0, 0.0) - Complex64::from_polar(1.0, -x)) / c(0.0, x)
    };
    start * factor
}

/// Time average `(1/τ) ∫ evolve(ρ, gen, t0, s) ds` over the window.
///
/// Coherences between eigenvectors with distinct eigenvalues are multiplied
/// by the window mean of their relative phase factor, which decays like
/// `1 / (g · Δε · τ)`; populations are untouched. Constant profiles use the
/// closed form, other profiles nested quadrature.
pub fn time_average(
    state: &DensityOperator,
    gen: &EvolutionGenerator,
    t0: f64,
    window: &DecisionWindow,
) -> Result<DensityOperator> {
    check_layout(state, gen)?;
    let dim = gen.dim();
    let (a, b) = (window.start(), window.end());
    let mut rho = gen.to_eigenbasis(state.matrix());
    for u in 0..dim {
        for v in (u + 1)..dim {
            let delta = gen.rate() * (gen.levels()[u] - gen.levels()[v]);
            let mean = if delta == 0.0 {
                c(1.0, 0.0)
            } else {
                match gen.profile() {
                    Profile::Constant => mean_phase_constant(delta, a - t0, b - t0),
                    profile => {
                        let tol = Tolerance {
                            abs: 1e-12,
                            rel: 1e-12,
                            max_intervals: 200_000,
                        };
                        let angle = |s: f64| profile.integral(t0, s).map(|h| delta * h);
                        let re = quadrature::integrate(
                            |s| angle(s).map_or(f64::NAN, f64::cos),
                            a,
                            b,
                            tol,
                        )?
                        .value;
                        let im = quadrature::integrate(
                            |s| angle(s).map_or(f64::NAN, |x| -x.sin()),
                            a,
                            b,
                            tol,
                        )?
                        .value;
                        c(re / window.duration(), im / window.duration())
                    }
                }
            };
            rho[(u, v)] *= mean;
            rho[(v, u)] *= mean.conj();
        }
    }
    Ok(DensityOperator::from_trusted(
        gen.from_eigenbasis(&rho),
        state.layout().clone(),
    ))
}

/// Lüders update `PρP / Tr(ρP)`; `projector` is embedded into the state's
/// layout when it acts on a subset of factors.
pub fn luders_update(state: &DensityOperator, projector: &LocalOperator) -> Result<DensityOperator> {
    let p = projector.embed(state.layout())?;
    let weight = trace_product(state.matrix(), &p)?.re;
    if weight <= 1e-12 {
        return Err(Error::ImpossibleConditioning(weight));
    }
    let m = (&(&p * state.matrix()) * &p).scale(c(1.0 / weight, 0.0));
    Ok(DensityOperator::from_trusted(symmetrized(&m), state.layout().clone()))
}

/// `Σ_m P_m ρ P_m` for an orthonormal basis spanning the state's space.
pub fn dephase(state: &DensityOperator, basis: &[Vec<Complex64>]) -> Result<DensityOperator> {
    let dim = state.dim();
    if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "dephasing basis must hold {dim} vectors of length {dim}"
        )));
    }
    let dev = orthonormality_deviation(basis);
    if dev > BASIS_TOL {
        return Err(Error::NotOrthonormal(dev));
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for v in basis {
        let rv = state.matrix().apply(v)?;
        let weight: Complex64 = v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum();
        let proj = ComplexMatrix::outer(v, v).scale(c(weight.re, 0.0));
        out = &out + &proj;
    }
    Ok(DensityOperator::from_trusted(out, state.layout().clone()))
}

/// State on a single factor, for convenience in tests and scenarios.
pub fn pure_on(label: &str, v: Vec<Complex64>) -> Result<DensityOperator> {
    let layout = SpaceLayout::single(label, v.len())?;
    make_density(&StateSpec::Pure(v), &layout)
}
