//! Initial-time evaluation: expected utility, Luce weights, the quarter law
//! and the aggregate attraction rule.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Magnitude of a non-informative attraction factor.
pub const QUARTER: f64 = 0.25;

/// Payoffs with their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    outcomes: Vec<(f64, f64)>,
}

impl Lottery {
    pub fn new(outcomes: Vec<(f64, f64)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidConfig("lottery without outcomes".into()));
        }
        if outcomes
            .iter()
            .any(|(x, p)| !x.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidConfig("lottery probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!("lottery probabilities sum to {total}")));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }
}

/// `Σ u(x_i) p(x_i)`.
pub fn expected_utility(lottery: &Lottery, u: impl Fn(f64) -> f64) -> f64 {
    lottery.outcomes.iter().map(|&(x, p)| u(x) * p).sum()
}

/// Expected utilities turned into nonnegative Luce attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityProfile {
    pub utilities: Vec<f64>,
    /// Wealth shift `U₀` added before taking attributes; zero unless the
    /// utilities have mixed signs.
    pub shift: f64,
    pub attributes: Vec<f64>,
}

/// Nonnegative utilities are used directly, all-negative ones through
/// `1/|U|`, and mixed signs are first shifted by `|min U|`. Zero counts as
/// nonnegative.
pub fn attributes_from_utilities(utilities: &[f64]) -> Result<UtilityProfile> {
    if utilities.is_empty() {
        return Err(Error::InvalidConfig("no utilities given".into()));
    }
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite("utility".into()));
    }
    let all_nonneg = utilities.iter().all(|&u| u >= 0.0);
    let all_neg = utilities.iter().all(|&u| u < 0.0);
    let (shift, attributes) = if all_nonneg {
        (0.0, utilities.to_vec())
    } else if all_neg {
        (0.0, utilities.iter().map(|u| 1.0 / u.abs()).collect())
    } else {
        let u0 = utilities.iter().cloned().fold(f64::INFINITY, f64::min).abs();
        (u0, utilities.iter().map(|u| u + u0).collect())
    };
    Ok(UtilityProfile {
        utilities: utilities.to_vec(),
        shift,
        attributes,
    })
}

/// `f_n = a_n / Σ a_m`.
pub fn luce_weights(profile: &UtilityProfile) -> Result<Vec<f64>> {
    luce(&profile.attributes)
}

pub fn luce(attributes: &[f64]) -> Result<Vec<f64>> {
    if attributes.iter().any(|a| *a < 0.0 || !a.is_finite()) {
        return Err(Error::InvalidConfig("Luce attributes must be finite and nonnegative".into()));
    }
    let total: f64 = attributes.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok(attributes.iter().map(|a| a / total).collect())
}

/// Density `φ` on `[−1, 1]` of attraction factor values.
#[derive(Clone)]
pub struct PriorDensity {
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PriorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PriorDensity")
    }
}

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-13,
        rel: 1e-13,
        max_intervals: 50_000,
    }
}

impl PriorDensity {
    /// Validates nonnegativity on a sample grid and unit mass within 1e-8.
    pub fn new(phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        for i in 0..=400 {
            let x = -1.0 + i as f64 / 200.0;
            let v = phi(x);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("prior density {v} at x = {x}")));
            }
        }
        let mass = integrate(&phi, -1.0, 0.0, tol())?.value + integrate(&phi, 0.0, 1.0, tol())?.value;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::Unnormalized(mass - 1.0));
        }
        Ok(Self { phi: Arc::new(phi) })
    }

    /// The non-informative prior: uniform on `[−1, 1]`.
    pub fn uniform() -> Self {
        Self::new(|_| 0.5).expect("uniform density is valid")
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.phi)(x)
    }
}

/// Mean positive and mean negative attraction under `prior`:
/// `q₊ = ∫₀¹ x φ dx`, `q₋ = ∫_{−1}⁰ x φ dx`.
///
/// For the uniform prior this gives `±1/4`. The same values follow from
/// averaging, over their admissible ranges, the bounds `λ₊ x₊` and `λ₋ x₋`
/// of positive and negative attraction factors.
pub fn quarter_law(prior: &PriorDensity) -> Result<(f64, f64)> {
    let t = Tolerance {
        abs: 1e-12,
        ..tol()
    };
    let plus = integrate(|x| x * prior.value(x), 0.0, 1.0, t)?.value;
    let minus = integrate(|x| x * prior.value(x), -1.0, 0.0, t)?.value;
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attitude {
    Attractive,
    Repulsive,
    Neutral,
}

impl Attitude {
    pub fn attraction(self) -> f64 {
        match self {
            Attitude::Attractive => QUARTER,
            Attitude::Repulsive => -QUARTER,
            Attitude::Neutral => 0.0,
        }
    }
}

/// `f ± 1/4` with an out-of-range flag instead of clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub f: f64,
    pub q: f64,
    pub p: f64,
    pub out_of_range: bool,
}

pub fn aggregate_probability(f: f64, attitude: Attitude) -> Aggregate {
    let q = attitude.attraction();
    let p = f + q;
    Aggregate {
        f,
        q,
        p,
        out_of_range: !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&f),
    }
}
