//! Scenario file format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SingleDecision,
    Successive,
    Behavioral,
    Network,
    Paradox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<AlternativesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feelings: Option<FeelingsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paradox: Option<ParadoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Complex number as `[re, im]`.
pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Eigenvalue constants `ε_u`, one per basis vector.
    pub eigenvalues: Vec<f64>,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default = "one")]
    pub rate: f64,
    /// Factors the generator acts on, in layout order. Defaults to all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<String>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasisSpec {
    /// Standard composite basis: the generator is diagonal.
    #[default]
    Standard,
    /// Eigenvectors of a seeded random Hermitian matrix.
    Random { seed: u64 },
    /// Random basis on the first factor times the standard basis on the rest.
    RandomProduct { seed: u64 },
    Explicit { vectors: Vec<Vec<Complex>> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    #[default]
    Constant,
    Linear { offset: f64, slope: f64 },
    Sine { offset: f64, amplitude: f64, frequency: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateInput {
    Pure(Vec<Complex>),
    Mixture(Vec<MixtureItem>),
    Random { seed: u64, terms: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureItem {
    pub weight: f64,
    pub vector: Vec<Complex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativesSpec {
    /// Factor the alternatives live on.
    pub label: String,
    /// Orthonormal alternative vectors; the standard basis if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<Complex>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionSpec {
    #[default]
    Gaussian,
    UniformModulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationSpec {
    #[default]
    Balanced,
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeelingsSpec {
    /// Subject factor the feelings are written in.
    pub subject: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub distribution: DistributionSpec,
    /// Standard deviation (Gaussian) or modulus (uniform modulus).
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub normalization: NormalizationSpec,
    /// Explicit amplitudes `b[n][α]`, overriding sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Vec<Complex>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub alternatives: AlternativesSpec,
    pub generator: GeneratorSpec,
    pub window: WindowSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InteractionSpec {
    LongRange,
    Ring,
    Adjacency(Vec<Vec<bool>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemorySpec {
    LongTerm,
    ShortTerm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub f: Vec<f64>,
    pub q0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(default = "one_step")]
    pub tau: u32,
    pub interaction: InteractionSpec,
    pub memory: MemorySpec,
    pub horizon: usize,
    pub agents: Vec<AgentSpec>,
}

fn one_step() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadoxSpec {
    pub name: String,
    #[serde(default)]
    pub inputs: ParadoxInputs,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadoxInputs {
    /// Planning: fraction planning the first alternative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_a1: Option<f64>,
    /// Disjunction: `f(A1B1), f(A1B2), f(A2B1), f(A2B2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<[f64; 4]>,
    /// Order effect: instance seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
    /// Evaluation times of probability runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Behavioral runs: report the state averaged over `[0, t]`.
    #[serde(default)]
    pub average: bool,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn in_unit(x: f64) -> bool {
    (-PROB_TOL..=1.0 + PROB_TOL).contains(&x)
}

pub fn parse_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text).map_err(|e| e.context(&path.display().to_string()))
}

pub fn parse_str(text: &str) -> CliResult<ScenarioFile> {
    let s: ScenarioFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

pub fn from_value(v: Value) -> CliResult<ScenarioFile> {
    let s: ScenarioFile = serde_json::from_value(v).map_err(|e| schema(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

impl ScenarioFile {
    fn need<'a, T>(&self, field: &'a Option<T>, key: &str) -> CliResult<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| schema(format!("kind {:?} requires key \"{key}\"", self.kind)))
    }

    pub fn validate(&self) -> CliResult<()> {
        match self.kind {
            Kind::SingleDecision | Kind::Behavioral => {
                self.need(&self.dimensions, "dimensions")?;
                self.need(&self.state, "state")?;
                self.need(&self.alternatives, "alternatives")?;
                if self.kind == Kind::Behavioral {
                    self.need(&self.feelings, "feelings")?;
                }
            }
            Kind::Successive => {
                self.need(&self.dimensions, "dimensions")?;
                self.need(&self.state, "state")?;
                let stages = self.need(&self.stages, "stages")?;
                if stages.len() != 2 {
                    return Err(schema(format!("stages: expected 2 entries, got {}", stages.len())));
                }
            }
            Kind::Network => self.validate_network(self.need(&self.network, "network")?)?,
            Kind::Paradox => self.validate_paradox(self.need(&self.paradox, "paradox")?)?,
        }
        if let Some(dims) = &self.dimensions {
            if dims.is_empty() {
                return Err(schema("dimensions: at least one factor required"));
            }
            for (i, f) in dims.iter().enumerate() {
                if f.dim == 0 {
                    return Err(schema(format!("dimensions[{i}]: dim must be positive")));
                }
            }
        }
        if let Some(StateInput::Mixture(items)) = &self.state {
            for (i, item) in items.iter().enumerate() {
                if !(item.weight >= 0.0) {
                    return Err(schema(format!("state.mixture[{i}].weight: must be nonnegative")));
                }
            }
        }
        if let Some(g) = &self.generator {
            check_rate(g, "generator")?;
        }
        for (i, st) in self.stages.iter().flatten().enumerate() {
            check_rate(&st.generator, &format!("stages[{i}].generator"))?;
        }
        if let Some(times) = self.output.as_ref().and_then(|o| o.times.as_ref()) {
            if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
                return Err(schema("output.times: need finite values"));
            }
        }
        Ok(())
    }

    fn validate_network(&self, net: &NetworkSpec) -> CliResult<()> {
        if net.agents.len() != net.n {
            return Err(schema(format!("network.N = {} but {} agents given", net.n, net.agents.len())));
        }
        if !(net.j >= 0.0) || !net.j.is_finite() {
            return Err(schema(format!("network.J: must be finite and nonnegative, got {}", net.j)));
        }
        if net.tau == 0 {
            return Err(schema("network.tau: must be positive"));
        }
        for (i, a) in net.agents.iter().enumerate() {
            let key = format!("network.agents[{i}]");
            if a.f.len() != a.q0.len() || a.f.is_empty() {
                return Err(schema(format!("{key}: f and q0 need the same positive length")));
            }
            if a.f.iter().any(|x| !in_unit(*x)) {
                return Err(schema(format!("{key}.f: values must lie in [0, 1]")));
            }
            let sf: f64 = a.f.iter().sum();
            if (sf - 1.0).abs() > PROB_TOL {
                return Err(schema(format!("{key}.f: sums to {sf}, expected 1")));
            }
            let sq: f64 = a.q0.iter().sum();
            if sq.abs() > PROB_TOL {
                return Err(schema(format!("{key}.q0: sums to {sq}, expected 0")));
            }
            for (f, q) in a.f.iter().zip(&a.q0) {
                if !in_unit(f + q) {
                    return Err(schema(format!("{key}: f + q0 = {} outside [0, 1]", f + q)));
                }
            }
        }
        Ok(())
    }

    fn validate_paradox(&self, p: &ParadoxSpec) -> CliResult<()> {
        if !qdt_core::scenarios::BUILTIN_NAMES.contains(&p.name.as_str()) {
            return Err(schema(format!(
                "paradox.name: unknown scenario {:?}; expected one of {}",
                p.name,
                qdt_core::scenarios::BUILTIN_NAMES.join(", ")
            )));
        }
        if let Some(x) = p.inputs.p_a1 {
            if !in_unit(x) {
                return Err(schema(format!("paradox.inputs.p_a1: {x} outside [0, 1]")));
            }
        }
        if let Some(fr) = p.inputs.fractions {
            if fr.iter().any(|x| !in_unit(*x)) {
                return Err(schema("paradox.inputs.fractions: values must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.output
            .as_ref()
            .and_then(|o| o.times.clone())
            .unwrap_or_else(|| vec![0.0])
    }
}

fn check_rate(g: &GeneratorSpec, key: &str) -> CliResult<()> {
    if !(g.rate >= 0.0) || !g.rate.is_finite() {
        return Err(schema(format!("{key}.rate: must be finite and nonnegative, got {}", g.rate)));
    }
    Ok(())
}

/// Replaces the number at dotted `path` (array indices allowed) in `doc`.
pub fn set_number(doc: &mut Value, path: &str, value: f64) -> CliResult<()> {
    let mut cur = doc;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(map) => map
                .get_mut(part)
                .ok_or_else(|| schema(format!("sweep parameter {path}: no key \"{part}\"")))?,
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| schema(format!("sweep parameter {path}: \"{part}\" is not an index")))?;
                items
                    .get_mut(i)
                    .ok_or_else(|| schema(format!("sweep parameter {path}: index {i} out of range")))?
            }
            _ => return Err(schema(format!("sweep parameter {path}: \"{part}\" is not a container"))),
        };
    }
    if !cur.is_number() {
        return Err(schema(format!("sweep parameter {path}: target is not numeric")));
    }
    if cur.is_u64() || cur.is_i64() {
        if value.fract() != 0.0 || value.abs() > 9.0e15 {
            return Err(schema(format!("sweep parameter {path}: integer field, got {value}")));
        }
        *cur = Value::from(value as i64);
        return Ok(());
    }
    *cur = serde_json::Number::from_f64(value)
        .map(Value::Number)
        .ok_or_else(|| schema(format!("sweep value {value} is not finite")))?;
    Ok(())
}
