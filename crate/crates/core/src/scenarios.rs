//! Canned decision problems with their published numbers.
//!
//! Each scenario returns a [`Table`] of named values. [`Scenario::expected`]
//! lists the values the table should reproduce, each with a provenance note,
//! and [`Table::drift`] reports every entry that moved away.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::AlternativeSet;
use crate::priors::{aggregate_probability, attributes_from_utilities, luce_weights, Attitude};
use crate::probability::{joint_probability, Stage, SuccessiveProtocol};
use crate::state::{make_density, DecisionWindow, EvolutionGenerator, Profile, StateSpec};
use crate::tensor::{ComplexMatrix, SpaceLayout};

/// Seed of the documented order-effect instance.
pub const ORDER_EFFECT_SEED: u64 = 7;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// A number printed in the worked example.
    Published(&'static str),
    /// Hand-solved or produced by an independent check.
    Derived(&'static str),
    /// Observed frequencies quoted for comparison. Not a target.
    Empirical(&'static str),
}

impl Source {
    pub fn note(&self) -> &'static str {
        match self {
            Source::Published(s) | Source::Derived(s) | Source::Empirical(s) => s,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Published(_) => "published",
            Source::Derived(_) => "derived",
            Source::Empirical(_) => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub key: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub source: Source,
}

const fn published(key: &'static str, value: f64, tolerance: f64, note: &'static str) -> Expected {
    Expected {
        key,
        value,
        tolerance,
        source: Source::Published(note),
    }
}

const fn empirical(key: &'static str, value: f64, note: &'static str) -> Expected {
    Expected {
        key,
        value,
        tolerance: f64::INFINITY,
        source: Source::Empirical(note),
    }
}

/// Rounds to the three decimals used in the published tables.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Named outputs of one scenario run, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub values: Vec<(String, f64)>,
    pub flags: Vec<(String, bool)>,
}

impl Table {
    fn push(&mut self, key: impl Into<String>, value: f64) {
        self.values.push((key.into(), value));
    }

    fn flag(&mut self, key: impl Into<String>, value: bool) {
        self.flags.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn flag_value(&self, key: &str) -> Option<bool> {
        self.flags.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Entries that miss their expected value. Empirical anchors are
    /// skipped; missing keys are reported with `got = NaN`.
    pub fn drift(&self, expected: &[Expected]) -> Vec<Drift> {
        expected
            .iter()
            .filter(|e| !matches!(e.source, Source::Empirical(_)))
            .filter_map(|e| {
                let got = self.get(e.key).unwrap_or(f64::NAN);
                let off = (got - e.value).abs();
                (off.is_nan() || off > e.tolerance).then_some(Drift { expected: *e, got })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub expected: Expected,
    pub got: f64,
}

impl fmt::Display for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {} ± {:e}, got {} ({}: {})",
            self.expected.key,
            self.expected.value,
            self.expected.tolerance,
            self.got,
            self.expected.source.kind(),
            self.expected.source.note()
        )
    }
}

/// One alternative of a canned problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeSpec {
    pub name: &'static str,
    /// Salary, classical fraction or probability, depending on the scenario.
    pub attribute: f64,
    pub attitude: Attitude,
}

/// A canned problem: alternatives with their data and attitudes, grouped
/// into the choices that are compared, plus the expected outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// Each inner list is one choice among alternatives.
    pub choices: Vec<Vec<AlternativeSpec>>,
    pub expected: Vec<Expected>,
}

impl Scenario {
    /// Attitudes within each choice must cancel: `Σ ±1/4 = 0`.
    pub fn validate(&self) -> Result<()> {
        for (i, choice) in self.choices.iter().enumerate() {
            let total: f64 = choice.iter().map(|a| a.attitude.attraction()).sum();
            if total.abs() > 1e-12 {
                return Err(Error::Consistency(format!(
                    "{}: attitudes of choice {i} sum to {total}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Names accepted by [`builtin`] and [`run_builtin`].
pub const BUILTIN_NAMES: [&str; 6] = ["planning", "disjunction", "fishburn", "break-decay", "break-joint", "order-effect"];

fn alt(name: &'static str, attribute: f64, attitude: Attitude) -> AlternativeSpec {
    AlternativeSpec {
        name,
        attribute,
        attitude,
    }
}

const SALARIES: [f64; 3] = [65000.0, 58000.0, 50000.0];
/// Prestige rank of jobs A, B, C: low, medium, high.
const PRESTIGE: [u8; 3] = [0, 1, 2];
const JOBS: [&str; 3] = ["A", "B", "C"];

pub fn builtin(name: &str) -> Option<Scenario> {
    use Attitude::*;
    let s = match name {
        "planning" => Scenario {
            name: "planning",
            description: "Plan to stop smoking versus really stopping; attitudes flip between planning and execution",
            choices: vec![
                vec![alt("A1", 0.85, Attractive), alt("A2", 0.15, Repulsive)],
                vec![alt("B1", f64::NAN, Repulsive), alt("B2", f64::NAN, Attractive)],
            ],
            expected: vec![
                published("p(B1)", 0.35, 5e-4, "predicted fraction really stopping"),
                published("p(B2)", 0.65, 5e-4, "predicted fraction not stopping"),
                empirical("p_exp(B1)", 0.36, "observed fraction stopping within a year"),
                empirical("p_exp(B2)", 0.64, "observed fraction not stopping"),
            ],
        },
        "disjunction" => Scenario {
            name: "disjunction",
            description: "Two-step gamble: accept the second game without knowing the first result",
            choices: vec![vec![alt("A1B", 0.64, Repulsive), alt("A2B", 0.36, Attractive)]],
            expected: vec![
                published("f(A1B)", 0.64, 5e-4, "classical fraction accepting"),
                published("f(A2B)", 0.36, 5e-4, "classical fraction refusing"),
                published("p(A1B)", 0.39, 5e-4, "predicted fraction accepting"),
                published("p(A2B)", 0.61, 5e-4, "predicted fraction refusing"),
                empirical("p_exp(A1B)", 0.36, "observed fraction accepting"),
                empirical("p_exp(A2B)", 0.64, "observed fraction refusing"),
            ],
        },
        "fishburn" => Scenario {
            name: "fishburn",
            description: "Pairwise job comparisons by salary and prestige producing a preference loop",
            choices: vec![
                vec![alt("A", SALARIES[0], Neutral), alt("B", SALARIES[1], Neutral)],
                vec![alt("B", SALARIES[1], Neutral), alt("C", SALARIES[2], Neutral)],
                vec![alt("C", SALARIES[2], Attractive), alt("A", SALARIES[0], Repulsive)],
            ],
            expected: vec![
                published("p1(A)", 0.528, 5e-4, "A versus B, close prestige"),
                published("p1(B)", 0.472, 5e-4, "A versus B, close prestige"),
                published("p2(B)", 0.537, 5e-4, "B versus C, close prestige"),
                published("p2(C)", 0.463, 5e-4, "B versus C, close prestige"),
                published("p3(C)", 0.685, 5e-4, "C versus A, very different prestige"),
                published("p3(A)", 0.315, 5e-4, "C versus A, very different prestige"),
            ],
        },
        "break-decay" => Scenario {
            name: "break-decay",
            description: "Preference loop broken by attraction decaying during the third comparison",
            choices: vec![vec![alt("C", SALARIES[2], Neutral), alt("A", SALARIES[0], Neutral)]],
            expected: vec![
                published("p3(C)", 0.435, 5e-4, "attraction decayed, utility only"),
                published("p3(A)", 0.565, 5e-4, "attraction decayed, utility only"),
            ],
        },
        "break-joint" => Scenario {
            name: "break-joint",
            description: "Preference loop broken by choosing among all three jobs at once",
            choices: vec![vec![
                alt("A", SALARIES[0], Repulsive),
                alt("B", SALARIES[1], Neutral),
                alt("C", SALARIES[2], Attractive),
            ]],
            expected: vec![
                published("f(A)", 0.376, 5e-4, "three-way utility factor"),
                published("f(B)", 0.335, 5e-4, "three-way utility factor"),
                published("f(C)", 0.289, 5e-4, "three-way utility factor"),
                published("p(A)", 0.126, 5e-4, "three-way probability"),
                published("p(B)", 0.335, 5e-4, "three-way probability"),
                published("p(C)", 0.539, 5e-4, "three-way probability"),
            ],
        },
        "order-effect" => Scenario {
            name: "order-effect",
            description: "Two questions with non-commuting dynamics asked in both orders",
            choices: vec![],
            expected: vec![Expected {
                key: "gap",
                value: 0.0,
                tolerance: f64::INFINITY,
                source: Source::Derived("gap must exceed 0.01 for the seeded instance"),
            }],
        },
        _ => return None,
    };
    Some(s)
}

/// Runs a built-in scenario with its documented inputs.
pub fn run_builtin(name: &str) -> Result<Table> {
    match name {
        "planning" => Ok(planning_paradox(0.85)?.table()),
        "disjunction" => Ok(disjunction_effect([0.345, 0.295, 0.155, 0.205])?.table()),
        "fishburn" => Ok(fishburn_intransitivity()?.table()),
        "break-decay" => Ok(break_loop(BreakMode::Decay)?.table()),
        "break-joint" => Ok(break_loop(BreakMode::Joint)?.table()),
        "order-effect" => Ok(order_effect_demo(ORDER_EFFECT_SEED)?.table()),
        other => Err(Error::InvalidConfig(format!("unknown scenario {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanningResult {
    pub f1: f64,
    pub p_a: [f64; 2],
    pub p_b: [f64; 2],
    /// Some utility factor or probability left `[0, 1]`.
    pub infeasible: bool,
}

impl PlanningResult {
    pub fn table(&self) -> Table {
        let mut t = Table::default();
        t.push("f(A1)", self.f1);
        t.push("f(A2)", 1.0 - self.f1);
        t.push("p(A1)", self.p_a[0]);
        t.push("p(A2)", self.p_a[1]);
        t.push("p(B1)", self.p_b[0]);
        t.push("p(B2)", self.p_b[1]);
        t.flag("infeasible", self.infeasible);
        t.flag("reversal", self.reversal());
        t
    }

    /// `p(A1) > p(A2)` while `p(B1) < p(B2)`.
    pub fn reversal(&self) -> bool {
        self.p_a[0] > self.p_a[1] && self.p_b[0] < self.p_b[1]
    }
}

/// Planning (A) versus execution (B) with shared utility factors and
/// attraction `+1/4 → −1/4` on the first alternative.
pub fn planning_paradox(p_a1: f64) -> Result<PlanningResult> {
    if !p_a1.is_finite() {
        return Err(Error::NonFinite("p(A1)".into()));
    }
    let f1 = p_a1 - Attitude::Attractive.attraction();
    let a1 = aggregate_probability(f1, Attitude::Attractive);
    let a2 = aggregate_probability(1.0 - f1, Attitude::Repulsive);
    let b1 = aggregate_probability(f1, Attitude::Repulsive);
    let b2 = aggregate_probability(1.0 - f1, Attitude::Attractive);
    Ok(PlanningResult {
        f1,
        p_a: [a1.p, a2.p],
        p_b: [b1.p, b2.p],
        infeasible: [a1, a2, b1, b2].iter().any(|a| a.out_of_range),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjunctionResult {
    pub f: [f64; 2],
    pub p: [f64; 2],
    pub out_of_range: bool,
}

impl DisjunctionResult {
    pub fn table(&self) -> Table {
        let mut t = Table::default();
        t.push("f(A1B)", self.f[0]);
        t.push("f(A2B)", self.f[1]);
        t.push("p(A1B)", self.p[0]);
        t.push("p(A2B)", self.p[1]);
        t.flag("sure-thing-f", self.f[0] > self.f[1]);
        t.flag("sure-thing-p", self.p[0] > self.p[1]);
        t.flag("out-of-range", self.out_of_range);
        t
    }
}

/// `fractions` are `f(A1B1), f(A1B2), f(A2B1), f(A2B2)`.
pub fn disjunction_effect(fractions: [f64; 4]) -> Result<DisjunctionResult> {
    if fractions.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidConfig("joint fractions must lie in [0, 1]".into()));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized(total - 1.0));
    }
    let f1 = fractions[0] + fractions[1];
    let f2 = fractions[2] + fractions[3];
    let a1 = aggregate_probability(f1, Attitude::Repulsive);
    let a2 = aggregate_probability(f2, Attitude::Attractive);
    Ok(DisjunctionResult {
        f: [f1, f2],
        p: [a1.p, a2.p],
        out_of_range: a1.out_of_range || a2.out_of_range,
    })
}

/// One comparison between two alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairwise {
    pub names: [&'static str; 2],
    pub f: [f64; 2],
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl Pairwise {
    pub fn winner(&self) -> usize {
        usize::from(self.p[1] > self.p[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FishburnResult {
    pub pairs: Vec<Pairwise>,
    pub loop_detected: bool,
}

impl FishburnResult {
    pub fn table(&self) -> Table {
        let mut t = Table::default();
        for (i, pair) in self.pairs.iter().enumerate() {
            for s in 0..2 {
                t.push(format!("p{}({})", i + 1, pair.names[s]), pair.p[s]);
            }
        }
        t.flag("loop", self.loop_detected);
        t
    }
}

/// Attraction of each job in a two-way comparison: none for neighbouring
/// prestige ranks, `±1/4` towards the more prestigious job otherwise.
fn pair_attitudes(i: usize, j: usize) -> [Attitude; 2] {
    let gap = PRESTIGE[i].abs_diff(PRESTIGE[j]);
    if gap <= 1 {
        [Attitude::Neutral, Attitude::Neutral]
    } else if PRESTIGE[i] > PRESTIGE[j] {
        [Attitude::Attractive, Attitude::Repulsive]
    } else {
        [Attitude::Repulsive, Attitude::Attractive]
    }
}

fn compare(i: usize, j: usize, attitudes: [Attitude; 2]) -> Result<Pairwise> {
    let f = luce_weights(&attributes_from_utilities(&[SALARIES[i], SALARIES[j]])?)?;
    let a = [aggregate_probability(f[0], attitudes[0]), aggregate_probability(f[1], attitudes[1])];
    Ok(Pairwise {
        names: [JOBS[i], JOBS[j]],
        f: [f[0], f[1]],
        q: [a[0].q, a[1].q],
        p: [a[0].p, a[1].p],
    })
}

/// True if the "preferred over" relation given by the pairs has a cycle.
pub fn has_preference_loop(pairs: &[Pairwise]) -> bool {
    let mut names: Vec<&str> = pairs.iter().flat_map(|p| p.names).collect();
    names.sort_unstable();
    names.dedup();
    let idx = |s: &str| names.iter().position(|n| *n == s).expect("name is listed");
    let n = names.len();
    let mut edge = vec![vec![false; n]; n];
    for p in pairs {
        let w = p.winner();
        edge[idx(p.names[w])][idx(p.names[1 - w])] = true;
    }
    // Transitive closure; a loop shows up as a self-reachable node.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if edge[i][k] && edge[k][j] {
                    edge[i][j] = true;
                }
            }
        }
    }
    (0..n).any(|i| edge[i][i])
}

/// A versus B, B versus C, C versus A with salaries as utilities.
pub fn fishburn_intransitivity() -> Result<FishburnResult> {
    let pairs = [(0, 1), (1, 2), (2, 0)]
        .into_iter()
        .map(|(i, j)| compare(i, j, pair_attitudes(i, j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FishburnResult {
        loop_detected: has_preference_loop(&pairs),
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakMode {
    /// Attraction in the third comparison decays to zero.
    Decay,
    /// All three jobs are compared in one choice.
    Joint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub mode: BreakMode,
    pub names: Vec<&'static str>,
    pub f: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Names from least to most preferred.
    pub ordering: Vec<&'static str>,
    pub loop_detected: bool,
}

impl Resolution {
    pub fn table(&self) -> Table {
        let mut t = Table::default();
        let prefix = match self.mode {
            BreakMode::Decay => "3",
            BreakMode::Joint => "",
        };
        for (i, n) in self.names.iter().enumerate() {
            if self.mode == BreakMode::Joint {
                t.push(format!("f({n})"), self.f[i]);
            }
        }
        for (i, n) in self.names.iter().enumerate() {
            t.push(format!("p{prefix}({n})"), self.p[i]);
        }
        t.flag("loop", self.loop_detected);
        t
    }
}

pub fn break_loop(mode: BreakMode) -> Result<Resolution> {
    let (names, f, q, loop_detected) = match mode {
        BreakMode::Decay => {
            let mut pairs = fishburn_intransitivity()?.pairs;
            let third = compare(2, 0, [Attitude::Neutral, Attitude::Neutral])?;
            pairs[2] = third.clone();
            (third.names.to_vec(), third.f.to_vec(), third.q.to_vec(), has_preference_loop(&pairs))
        }
        BreakMode::Joint => {
            let f = luce_weights(&attributes_from_utilities(&SALARIES)?)?;
            let q = [Attitude::Repulsive, Attitude::Neutral, Attitude::Attractive].map(|a| a.attraction());
            (JOBS.to_vec(), f, q.to_vec(), false)
        }
    };
    let p: Vec<f64> = f.iter().zip(&q).map(|(f, q)| f + q).collect();
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    Ok(Resolution {
        mode,
        ordering: order.iter().map(|&i| names[i]).collect(),
        names,
        f,
        q,
        p,
        loop_detected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEffect {
    /// `p(A₀B₀)`: A asked first.
    pub p_ab: f64,
    /// `p(B₀A₀)`: B asked first, same windows.
    pub p_ba: f64,
    pub gap: f64,
}

impl OrderEffect {
    /// `gap / p(AB)`.
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.p_ab
    }

    pub fn table(&self) -> Table {
        let mut t = Table::default();
        t.push("p(AB)", self.p_ab);
        t.push("p(BA)", self.p_ba);
        t.push("gap", self.gap);
        t.push("relative-gap", self.relative_gap());
        t
    }
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_basis(rng: &mut ChaCha8Rng, d: usize) -> Result<Vec<Vec<Complex64>>> {
    let h = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    Ok((&h + &h.adjoint()).hermitian_eigen()?.1)
}

fn order_instance(seed: u64, commuting: bool) -> Result<OrderEffect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = SpaceLayout::new([("A", 2), ("B", 2), ("S", 2)])?;
    let items = (0..3)
        .map(|_| (rng.random_range(0.1..1.0), random_vector(&mut rng, 8)))
        .collect();
    let rho = make_density(&StateSpec::Mixture(items), &layout)?;
    let stage = |rng: &mut ChaCha8Rng, label: &str, start: f64| -> Result<Stage> {
        let sub = SpaceLayout::new([(label, 2), ("S", 2)])?;
        let levels: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let generator = if commuting {
            EvolutionGenerator::diagonal(sub, levels, Profile::Constant, 1.0)?
        } else {
            EvolutionGenerator::new(sub, random_basis(rng, 4)?, levels, Profile::Constant, 1.0)?
        };
        Ok(Stage {
            alternatives: AlternativeSet::standard(label, 2)?,
            generator,
            window: DecisionWindow::new(start, 1.0)?,
        })
    };
    let first = stage(&mut rng, "A", 0.0)?;
    let second = stage(&mut rng, "B", 1.5)?;
    let protocol = SuccessiveProtocol::new(first, second)?;
    let t = protocol.second().window.end();
    let p_ab = joint_probability(&rho, &protocol, 0, 0, t)?.value;
    let p_ba = joint_probability(&rho, &protocol.swapped(), 0, 0, t)?.value;
    Ok(OrderEffect {
        p_ab,
        p_ba,
        gap: (p_ab - p_ba).abs(),
    })
}

/// Two binary questions on a shared two-level subject, each evolving under
/// its own generator whose eigenbasis mixes the question with the subject.
pub fn order_effect_demo(seed: u64) -> Result<OrderEffect> {
    order_instance(seed, false)
}

/// Same construction with generators diagonal in the question basis, so
/// both orders agree.
pub fn order_effect_control(seed: u64) -> Result<OrderEffect> {
    order_instance(seed, true)
}
