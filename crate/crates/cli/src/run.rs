//! Dispatch from a parsed scenario to the engine and rendering of results.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qdt_core::behavioral::{evolve_behavioral, evolve_behavioral_averaged};
use qdt_core::measures::{
    sample_feelings, AlternativeSet, FeelingAmplitudes, FeelingDistribution, Normalization,
};
use qdt_core::network::{consensus_fixed_point, simulate, AgentState, Interaction, Memory, NetworkConfig};
use qdt_core::probability::{clamp_for_report, evolved_probability, joint_probability, Stage, SuccessiveProtocol};
use qdt_core::scenarios::{
    self, break_loop, disjunction_effect, fishburn_intransitivity, order_effect_demo, planning_paradox, BreakMode,
    Table, ORDER_EFFECT_SEED,
};
use qdt_core::state::{make_density, DecisionWindow, DensityOperator, EvolutionGenerator, Profile, StateSpec};
use qdt_core::tensor::{product_basis, standard_basis, ComplexMatrix, SpaceLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::schema::*;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_VAR: &str = "QDT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "qdt-output";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const PROBABILITY_HEADER: [&str; 5] = ["t", "alternative", "f", "q", "p"];
pub const NETWORK_HEADER: [&str; 7] = ["t", "agent", "alternative", "f", "q", "p", "M"];

const REPORT_TOL: f64 = 1e-10;

/// In-memory result of one run: the CSV bytes and the JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub summary: Value,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_status: i32,
    pub outputs: Vec<PathBuf>,
    pub summary: Value,
    pub duration: Duration,
}

struct ProbRow {
    t: f64,
    alternative: String,
    f: f64,
    q: f64,
    p: f64,
}

/// Rejects values that are not probabilities beyond round-off, then clamps
/// the round-off away.
fn reported(x: f64, what: &str) -> CliResult<f64> {
    if !x.is_finite() {
        return Err(CliError::Numerical(format!("{what} is not finite")));
    }
    if !(-REPORT_TOL..=1.0 + REPORT_TOL).contains(&x) {
        return Err(CliError::Invariant(format!("{what} = {x} outside [0, 1]")));
    }
    Ok(clamp_for_report(x))
}

impl ProbRow {
    fn new(t: f64, alternative: impl Into<String>, f: f64, q: f64, p: f64) -> CliResult<Self> {
        let alternative = alternative.into();
        let f = reported(f, &format!("f({alternative}, t = {t})"))?;
        let p = reported(p, &format!("p({alternative}, t = {t})"))?;
        Ok(Self {
            t,
            alternative,
            f,
            q,
            p,
        })
    }

    fn bare(t: f64, alternative: impl Into<String>, p: f64) -> CliResult<Self> {
        Self::new(t, alternative, p, 0.0, p)
    }

    fn json(&self) -> Value {
        json!({"t": self.t, "alternative": self.alternative, "f": self.f, "q": self.q, "p": self.p})
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn probability_csv(rows: &[ProbRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROBABILITY_HEADER)?;
    for r in rows {
        w.write_record([num(r.t), r.alternative.clone(), num(r.f), num(r.q), num(r.p)])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn complex(v: &[Complex]) -> Vec<Complex64> {
    v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

fn layout(s: &ScenarioFile) -> CliResult<SpaceLayout> {
    let dims = s
        .dimensions
        .as_ref()
        .ok_or_else(|| CliError::Schema("missing dimensions".into()))?;
    Ok(SpaceLayout::new(dims.iter().map(|f| (f.label.clone(), f.dim)))?)
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_basis(seed: u64, d: usize) -> CliResult<Vec<Vec<Complex64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    Ok((&h + &h.adjoint()).hermitian_eigen()?.1)
}

fn state(s: &ScenarioFile, layout: &SpaceLayout) -> CliResult<DensityOperator> {
    let spec = match s.state.as_ref().ok_or_else(|| CliError::Schema("missing state".into()))? {
        StateInput::Pure(v) => StateSpec::Pure(complex(v)),
        StateInput::Mixture(items) => {
            StateSpec::Mixture(items.iter().map(|i| (i.weight, complex(&i.vector))).collect())
        }
        StateInput::Random { seed, terms } => {
            if *terms == 0 {
                return Err(CliError::Schema("state.random.terms: must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let d = layout.total_dim();
            StateSpec::Mixture(
                (0..*terms)
                    .map(|_| (rng.random_range(0.05..1.0), random_vector(&mut rng, d)))
                    .collect(),
            )
        }
    };
    Ok(make_density(&spec, layout)?)
}

fn profile(p: &ProfileSpec) -> Profile {
    match *p {
        ProfileSpec::Constant => Profile::Constant,
        ProfileSpec::Linear { offset, slope } => Profile::Linear { offset, slope },
        ProfileSpec::Sine {
            offset,
            amplitude,
            frequency,
        } => Profile::Sine {
            offset,
            amplitude,
            frequency,
        },
    }
}

/// Generator on its own factors, embedded into `full`.
fn generator(g: &GeneratorSpec, full: &SpaceLayout) -> CliResult<EvolutionGenerator> {
    Ok(own_generator(g, full)?.embed(full)?)
}

/// Generator on the factors it names (all of `full` by default).
fn own_generator(g: &GeneratorSpec, full: &SpaceLayout) -> CliResult<EvolutionGenerator> {
    let own = match &g.factors {
        Some(list) => {
            let keep: Vec<&str> = list.iter().map(String::as_str).collect();
            full.restrict(&keep)?
        }
        None => full.clone(),
    };
    let d = own.total_dim();
    let basis = match &g.basis {
        BasisSpec::Standard => standard_basis(d),
        BasisSpec::Random { seed } => random_basis(*seed, d)?,
        BasisSpec::RandomProduct { seed } => {
            let first = own.factors()[0].1;
            product_basis(&random_basis(*seed, first)?, &standard_basis(d / first))
        }
        BasisSpec::Explicit { vectors } => vectors.iter().map(|v| complex(v)).collect(),
    };
    Ok(EvolutionGenerator::new(own, basis, g.eigenvalues.clone(), profile(&g.profile), g.rate)?)
}

fn alternatives(a: &AlternativesSpec, layout: &SpaceLayout) -> CliResult<AlternativeSet> {
    let dim = layout
        .dim_of(&a.label)
        .ok_or_else(|| CliError::Schema(format!("alternatives.label: no factor {:?}", a.label)))?;
    Ok(match &a.vectors {
        Some(vs) => AlternativeSet::new(a.label.clone(), vs.iter().map(|v| complex(v)).collect())?,
        None => AlternativeSet::standard(a.label.clone(), dim)?,
    })
}

fn feelings(spec: &FeelingsSpec, n_alts: usize, layout: &SpaceLayout) -> CliResult<FeelingAmplitudes> {
    let ds = layout
        .dim_of(&spec.subject)
        .ok_or_else(|| CliError::Schema(format!("feelings.subject: no factor {:?}", spec.subject)))?;
    if let Some(rows) = &spec.amplitudes {
        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| complex(r)).collect();
        return Ok(FeelingAmplitudes::new(spec.subject.clone(), ComplexMatrix::from_rows(&rows)?)?);
    }
    let dist = match spec.distribution {
        DistributionSpec::Gaussian => FeelingDistribution::Gaussian { sigma: spec.scale },
        DistributionSpec::UniformModulus => FeelingDistribution::UniformModulus { modulus: spec.scale },
    };
    Ok(sample_feelings(spec.subject.clone(), n_alts, ds, spec.seed, dist)?)
}

fn alt_name(label: &str, n: usize) -> String {
    format!("{label}{n}")
}

fn final_rows(rows: &[ProbRow]) -> Vec<Value> {
    let last = rows.last().map(|r| r.t);
    rows.iter().filter(|r| Some(r.t) == last).map(ProbRow::json).collect()
}

/// Runs a validated scenario and renders its outputs without touching disk.
pub fn run_scenario(s: &ScenarioFile) -> CliResult<RunOutput> {
    match s.kind {
        Kind::SingleDecision => single_decision(s),
        Kind::Behavioral => behavioral(s),
        Kind::Successive => successive(s),
        Kind::Network => network(s),
        Kind::Paradox => paradox(s),
    }
}

fn single_decision(s: &ScenarioFile) -> CliResult<RunOutput> {
    let layout = layout(s)?;
    let rho = state(s, &layout)?;
    let alts = alternatives(s.alternatives.as_ref().expect("validated"), &layout)?;
    let gen = match &s.generator {
        Some(g) => generator(g, &layout)?,
        None => EvolutionGenerator::zero(layout.clone()),
    };
    let mut rows = Vec::new();
    for t in s.times() {
        for n in 0..alts.len() {
            let p = evolved_probability(&rho, &gen, &alts.projector_op(n)?, t)?;
            rows.push(ProbRow::bare(t, alt_name(alts.label(), n), p)?);
        }
    }
    Ok(RunOutput {
        csv: probability_csv(&rows)?,
        summary: json!({"kind": "single-decision", "final": final_rows(&rows)}),
    })
}

fn behavioral(s: &ScenarioFile) -> CliResult<RunOutput> {
    let layout = layout(s)?;
    let rho = state(s, &layout)?;
    let alts = alternatives(s.alternatives.as_ref().expect("validated"), &layout)?;
    let spec = s.feelings.as_ref().expect("validated");
    let raw = feelings(spec, alts.len(), &layout)?;
    let gen = match &s.generator {
        Some(g) => generator(g, &layout)?,
        None => EvolutionGenerator::zero(layout.clone()),
    };
    let policy = match spec.normalization {
        NormalizationSpec::Balanced => Normalization::Balanced,
        NormalizationSpec::Scalar => Normalization::Scalar,
    };
    let average = s.output.as_ref().is_some_and(|o| o.average);
    let g = gen.rate();
    let mut rows = Vec::new();
    for t in s.times() {
        for n in 0..alts.len() {
            let b = if average && t != 0.0 {
                evolve_behavioral_averaged(&rho, &gen, &alts, &raw, n, t, g, policy)?
            } else {
                evolve_behavioral(&rho, &gen, &alts, &raw, n, t, g, policy)?
            };
            rows.push(ProbRow::new(t, alt_name(alts.label(), n), b.f, b.q, b.p)?);
        }
    }
    Ok(RunOutput {
        csv: probability_csv(&rows)?,
        summary: json!({
            "kind": "behavioral",
            "rate": g,
            "averaged": average,
            "final": final_rows(&rows),
        }),
    })
}

fn successive(s: &ScenarioFile) -> CliResult<RunOutput> {
    let layout = layout(s)?;
    let rho = state(s, &layout)?;
    let stages = s.stages.as_ref().expect("validated");
    // Stages keep their generators on their own factors; the protocol embeds them.
    let build = |st: &StageSpec| -> CliResult<Stage> {
        Ok(Stage {
            alternatives: alternatives(&st.alternatives, &layout)?,
            generator: own_generator(&st.generator, &layout)?,
            window: DecisionWindow::new(st.window.start, st.window.duration)?,
        })
    };
    let protocol = SuccessiveProtocol::new(build(&stages[0])?, build(&stages[1])?)?;
    let (la, lb) = (protocol.first().alternatives.label(), protocol.second().alternatives.label());
    let mut rows = Vec::new();
    let mut max_imag: f64 = 0.0;
    for t in s.times() {
        for n in 0..protocol.first().alternatives.len() {
            for k in 0..protocol.second().alternatives.len() {
                let rec = joint_probability(&rho, &protocol, n, k, t)?;
                max_imag = max_imag.max(rec.imaginary);
                rows.push(ProbRow::bare(t, format!("{}{}", alt_name(la, n), alt_name(lb, k)), rec.value)?);
            }
        }
    }
    Ok(RunOutput {
        csv: probability_csv(&rows)?,
        summary: json!({
            "kind": "successive",
            "order": [la, lb],
            "max_imaginary": max_imag,
            "final": final_rows(&rows),
        }),
    })
}

fn network(s: &ScenarioFile) -> CliResult<RunOutput> {
    let net = s.network.as_ref().expect("validated");
    let config = NetworkConfig {
        agents: net.n,
        coupling: net.j,
        interaction: match &net.interaction {
            InteractionSpec::LongRange => Interaction::LongRange,
            InteractionSpec::Ring => Interaction::Ring,
            InteractionSpec::Adjacency(a) => Interaction::Adjacency(a.clone()),
        },
        memory: match net.memory {
            MemorySpec::LongTerm => Memory::LongTerm,
            MemorySpec::ShortTerm => Memory::ShortTerm,
        },
        tau: net.tau,
        horizon: net.horizon,
    };
    let agents = net
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| AgentState::new(a.f.clone(), a.q0.clone()).map_err(|e| CliError::from(e).context(&format!("network.agents[{i}]"))))
        .collect::<CliResult<Vec<_>>>()?;
    let traj = simulate(&config, agents)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(NETWORK_HEADER)?;
    for (step, t) in traj.times.iter().enumerate() {
        for i in 0..net.n {
            for n in 0..traj.f[i].len() {
                let p = reported(traj.p[step][i][n], &format!("p of agent {i} at t = {t}"))?;
                w.write_record([
                    num(*t),
                    i.to_string(),
                    n.to_string(),
                    num(traj.f[i][n]),
                    num(traj.q[step][i][n]),
                    num(p),
                    num(traj.m[step][i]),
                ])?;
            }
        }
    }
    let csv = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let p_star = if net.n == 2 && net.memory == MemorySpec::LongTerm && net.agents.iter().all(|a| a.f.len() == 2) {
        consensus_fixed_point(net.agents[0].f[0], net.agents[1].f[0], net.agents[0].q0[0], net.agents[1].q0[0]).ok()
    } else {
        None
    };
    Ok(RunOutput {
        csv,
        summary: json!({
            "kind": "network",
            "regime": traj.regime.label(),
            "steps": net.horizon,
            "final_time": traj.times.last(),
            "final": traj.final_probabilities(),
            "p_star": p_star,
        }),
    })
}

fn table_json(t: &Table) -> Value {
    let values: serde_json::Map<String, Value> = t.values.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let flags: serde_json::Map<String, Value> = t.flags.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    json!({"values": values, "flags": flags})
}

fn paradox(s: &ScenarioFile) -> CliResult<RunOutput> {
    let spec = s.paradox.as_ref().expect("validated");
    let inputs = &spec.inputs;
    let mut rows = Vec::new();
    let table = match spec.name.as_str() {
        "planning" => {
            let r = planning_paradox(inputs.p_a1.unwrap_or(0.85))?;
            if r.infeasible {
                return Err(CliError::Invariant(format!(
                    "planning: p(A1) = {} leaves a utility factor or probability outside [0, 1]",
                    r.p_a[0]
                )));
            }
            let f = [r.f1, 1.0 - r.f1];
            for (i, (label, p)) in [("A", r.p_a), ("B", r.p_b)].into_iter().enumerate() {
                for n in 0..2 {
                    rows.push(ProbRow::new(i as f64, format!("{label}{}", n + 1), f[n], p[n] - f[n], p[n])?);
                }
            }
            r.table()
        }
        "disjunction" => {
            let r = disjunction_effect(inputs.fractions.unwrap_or([0.345, 0.295, 0.155, 0.205]))?;
            if r.out_of_range {
                return Err(CliError::Invariant("disjunction: aggregate probability outside [0, 1]".into()));
            }
            for n in 0..2 {
                rows.push(ProbRow::new(0.0, format!("A{}B", n + 1), r.f[n], r.p[n] - r.f[n], r.p[n])?);
            }
            r.table()
        }
        "fishburn" => {
            let r = fishburn_intransitivity()?;
            for (i, pair) in r.pairs.iter().enumerate() {
                for k in 0..2 {
                    rows.push(ProbRow::new((i + 1) as f64, pair.names[k], pair.f[k], pair.q[k], pair.p[k])?);
                }
            }
            r.table()
        }
        "break-decay" | "break-joint" => {
            let mode = if spec.name == "break-decay" { BreakMode::Decay } else { BreakMode::Joint };
            let r = break_loop(mode)?;
            let t = if mode == BreakMode::Decay { 3.0 } else { 0.0 };
            for i in 0..r.names.len() {
                rows.push(ProbRow::new(t, r.names[i], r.f[i], r.q[i], r.p[i])?);
            }
            r.table()
        }
        "order-effect" => {
            let r = order_effect_demo(inputs.seed.unwrap_or(ORDER_EFFECT_SEED))?;
            rows.push(ProbRow::bare(0.0, "A0B0", r.p_ab)?);
            rows.push(ProbRow::bare(0.0, "B0A0", r.p_ba)?);
            r.table()
        }
        other => return Err(CliError::Schema(format!("paradox.name: unknown scenario {other:?}"))),
    };
    let builtin = scenarios::builtin(&spec.name).expect("name validated");
    let defaults = inputs.p_a1.is_none_or(|x| x == 0.85)
        && inputs.fractions.is_none_or(|f| f == [0.345, 0.295, 0.155, 0.205])
        && inputs.seed.is_none_or(|x| x == ORDER_EFFECT_SEED);
    let expected: Vec<Value> = builtin
        .expected
        .iter()
        .map(|e| {
            json!({
                "key": e.key,
                "value": e.value,
                "tolerance": if e.tolerance.is_finite() { json!(e.tolerance) } else { Value::Null },
                "source": e.source.kind(),
                "note": e.source.note(),
            })
        })
        .collect();
    let drift: Vec<String> = if defaults {
        table.drift(&builtin.expected).iter().map(|d| d.to_string()).collect()
    } else {
        Vec::new()
    };
    let mut summary = json!({
        "kind": "paradox",
        "name": spec.name,
        "description": builtin.description,
        "table": table_json(&table),
        "expected": expected,
        "drift": drift,
    });
    if spec.name.starts_with("break-") {
        summary["ordering"] = json!(break_loop(if spec.name == "break-decay" { BreakMode::Decay } else { BreakMode::Joint })?.ordering);
    }
    Ok(RunOutput {
        csv: probability_csv(&rows)?,
        summary,
    })
}

/// Built-in paradox as a runnable scenario file.
pub fn builtin_scenario(name: &str) -> CliResult<ScenarioFile> {
    let b = scenarios::builtin(name).ok_or_else(|| {
        CliError::Schema(format!(
            "unknown scenario {name:?}; expected one of {}",
            scenarios::BUILTIN_NAMES.join(", ")
        ))
    })?;
    let inputs = match name {
        "planning" => ParadoxInputs {
            p_a1: Some(0.85),
            ..Default::default()
        },
        "disjunction" => ParadoxInputs {
            fractions: Some([0.345, 0.295, 0.155, 0.205]),
            ..Default::default()
        },
        "order-effect" => ParadoxInputs {
            seed: Some(ORDER_EFFECT_SEED),
            ..Default::default()
        },
        _ => ParadoxInputs::default(),
    };
    Ok(ScenarioFile {
        kind: Kind::Paradox,
        description: Some(b.description.to_string()),
        dimensions: None,
        generator: None,
        stages: None,
        state: None,
        alternatives: None,
        feelings: None,
        network: None,
        paradox: Some(ParadoxSpec {
            name: name.to_string(),
            inputs,
        }),
        output: None,
    })
}

/// Output directory: explicit override, then the scenario's `output.path`,
/// then the environment variable, then a fixed default.
pub fn output_dir(explicit: Option<&Path>, s: &ScenarioFile) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = s.output.as_ref().and_then(|o| o.path.as_ref()) {
        return PathBuf::from(p);
    }
    std::env::var_os(OUTPUT_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn write_output(out: &RunOutput, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let csv_path = dir.join(TRAJECTORY_FILE);
    let summary_path = dir.join(SUMMARY_FILE);
    std::fs::write(&csv_path, &out.csv).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    let mut text = serde_json::to_vec_pretty(&out.summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(&summary_path, text).map_err(|e| CliError::Io(format!("{}: {e}", summary_path.display())))?;
    Ok(vec![csv_path, summary_path])
}

/// Parses, runs and writes one scenario file.
pub fn run_file(path: &Path, out: Option<&Path>) -> CliResult<RunReport> {
    let start = Instant::now();
    let scenario = parse_scenario(path)?;
    let result = run_scenario(&scenario).map_err(|e| e.context(&path.display().to_string()))?;
    let outputs = write_output(&result, &output_dir(out, &scenario))?;
    Ok(RunReport {
        exit_status: 0,
        outputs,
        summary: result.summary,
        duration: start.elapsed(),
    })
}
