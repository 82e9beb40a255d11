//! Society of decision makers exchanging Kullback–Leibler information.
//!
//! Every agent keeps its rational fractions `f` and initial attraction
//! factors `q(0)`. After each delay step its probabilities become
//! `f + q(0) · exp(−M)`, where the memory functional `M` accumulates the
//! kernel-weighted information gains from the other agents.

use std::fmt;

use crate::error::{Error, Result};

/// Probabilities are confined to `[ε, 1 − ε]` before taking logarithms.
pub const KL_EPSILON: f64 = 1e-12;
/// Tolerance for normalization checks on agent data.
pub const AGENT_TOL: f64 = 1e-10;

/// `Σ_n p_i(n) ln(p_i(n) / p_j(n))`.
///
/// Fails when `p_j` vanishes on a component where `p_i` does not; components
/// where `p_i` vanishes contribute nothing.
pub fn info_gain(p_i: &[f64], p_j: &[f64]) -> Result<f64> {
    if p_i.len() != p_j.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p_i.len(),
            p_j.len()
        )));
    }
    let mut total = 0.0;
    for (n, (&a, &b)) in p_i.iter().zip(p_j).enumerate() {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite(format!("probability of alternative {n}")));
        }
        if a == b {
            continue;
        }
        if b < KL_EPSILON && a >= KL_EPSILON {
            return Err(Error::Divergence(format!(
                "alternative {n}: {a} against {b}"
            )));
        }
        let a = a.clamp(KL_EPSILON, 1.0 - KL_EPSILON);
        let b = b.clamp(KL_EPSILON, 1.0 - KL_EPSILON);
        total += a * (a / b).ln();
    }
    Ok(total)
}

/// `q(0) · exp(−M)`.
pub fn attraction_discount(q0: f64, m: f64) -> f64 {
    q0 * (-m).exp()
}

/// Closed-form common convention of two agents with long-term memory.
pub fn consensus_fixed_point(f1: f64, f2: f64, q1: f64, q2: f64) -> Result<f64> {
    let d = q2 - q1;
    if d.abs() <= 1e-15 {
        return Err(Error::Degenerate(format!(
            "initial attraction factors coincide ({q1})"
        )));
    }
    Ok((f1 * q2 - f2 * q1) / d)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// Every pair interacts with weight `J / (N − 1)`.
    LongRange,
    /// Ring lattice, weight `J` for the two nearest neighbors.
    Ring,
    /// Explicit neighbor matrix, weight `J` per neighbor.
    Adjacency(Vec<Vec<bool>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    LongTerm,
    ShortTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub agents: usize,
    pub coupling: f64,
    pub interaction: Interaction,
    pub memory: Memory,
    /// Delay in time units; one step advances time by `tau`.
    pub tau: u32,
    /// Number of steps to simulate.
    pub horizon: usize,
}

impl NetworkConfig {
    pub fn two_groups(coupling: f64, memory: Memory, horizon: usize) -> Self {
        Self {
            agents: 2,
            coupling,
            interaction: Interaction::LongRange,
            memory,
            tau: 1,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents < 2 {
            return Err(Error::InvalidConfig(format!("{} agents, need at least 2", self.agents)));
        }
        if self.tau < 1 {
            return Err(Error::InvalidConfig("tau must be at least 1".into()));
        }
        if !self.coupling.is_finite() || self.coupling < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "coupling must be finite and nonnegative, got {}",
                self.coupling
            )));
        }
        if let Interaction::Adjacency(adj) = &self.interaction {
            if adj.len() != self.agents || adj.iter().any(|row| row.len() != self.agents) {
                return Err(Error::DimensionMismatch(format!(
                    "adjacency must be {n}x{n}",
                    n = self.agents
                )));
            }
        }
        Ok(())
    }

    /// `J_ij` without the memory factor.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let n = self.agents;
        match &self.interaction {
            Interaction::LongRange => self.coupling / (n - 1) as f64,
            Interaction::Ring => {
                if (i + 1) % n == j || (j + 1) % n == i {
                    self.coupling
                } else {
                    0.0
                }
            }
            Interaction::Adjacency(adj) => {
                if adj[i][j] {
                    self.coupling
                } else {
                    0.0
                }
            }
        }
    }
}

/// One agent's data.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub f: Vec<f64>,
    pub q0: Vec<f64>,
    pub p: Vec<f64>,
    pub m: f64,
}

impl AgentState {
    /// Fresh agent at `t = 0` with `p = f + q(0)` and `M = 0`.
    pub fn new(f: Vec<f64>, q0: Vec<f64>) -> Result<Self> {
        if f.len() != q0.len() || f.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} rational fractions and {} attraction factors",
                f.len(),
                q0.len()
            )));
        }
        let sf: f64 = f.iter().sum();
        if (sf - 1.0).abs() > AGENT_TOL || f.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Consistency(format!("rational fractions sum to {sf}")));
        }
        let sq: f64 = q0.iter().sum();
        if sq.abs() > AGENT_TOL {
            return Err(Error::Consistency(format!("attraction factors sum to {sq}")));
        }
        for (n, (a, b)) in f.iter().zip(&q0).enumerate() {
            if *b < -a - AGENT_TOL || *b > 1.0 - a + AGENT_TOL {
                return Err(Error::Consistency(format!(
                    "attraction factor {b} of alternative {n} outside [{}, {}]",
                    -a,
                    1.0 - a
                )));
            }
        }
        let p = f.iter().zip(&q0).map(|(a, b)| a + b).collect();
        Ok(Self { f, q0, p, m: 0.0 })
    }

    /// Two-alternative agent from `f(A₁)` and `q(A₁, 0)`.
    pub fn binary(f: f64, q0: f64) -> Result<Self> {
        Self::new(vec![f, 1.0 - f], vec![q0, -q0])
    }

    pub fn q(&self) -> Vec<f64> {
        self.q0.iter().map(|q| attraction_discount(*q, self.m)).collect()
    }
}

/// `M_i(t)` from a gain history: `history[s - 1]` holds the matrix `μ_ij`
/// absorbed at step `s`. Long-term memory sums steps `1..=t`, short-term
/// memory keeps step `t` only.
pub fn memory_functional(history: &[Vec<Vec<f64>>], config: &NetworkConfig, i: usize, t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let kernel = |s: usize| -> f64 {
        history[s - 1][i]
            .iter()
            .enumerate()
            .map(|(j, mu)| config.weight(i, j) * mu)
            .sum()
    };
    match config.memory {
        Memory::LongTerm => (1..=t).map(kernel).sum(),
        Memory::ShortTerm => kernel(t),
    }
}

/// Network state between steps.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    agents: Vec<AgentState>,
    step: usize,
}

impl Network {
    pub fn new(config: NetworkConfig, agents: Vec<AgentState>) -> Result<Self> {
        config.validate()?;
        if agents.len() != config.agents {
            return Err(Error::DimensionMismatch(format!(
                "{} agents configured, {} given",
                config.agents,
                agents.len()
            )));
        }
        let n_alts = agents[0].f.len();
        if agents.iter().any(|a| a.f.len() != n_alts) {
            return Err(Error::DimensionMismatch("agents differ in alternative count".into()));
        }
        Ok(Self {
            config,
            agents,
            step: 0,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    /// Elapsed time `step · τ`.
    pub fn time(&self) -> f64 {
        (self.step as u64 * self.config.tau as u64) as f64
    }

    /// Information gains `μ_ij` for the current probabilities.
    pub fn gains(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.agents.len();
        let mut mu = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && self.config.weight(i, j) != 0.0 {
                    mu[i][j] = info_gain(&self.agents[i].p, &self.agents[j].p)?;
                }
            }
        }
        Ok(mu)
    }

    /// Advances by one delay: absorb the gains of the current state into the
    /// memory, then set `p = f + q(0) · exp(−M)`. Returns the gains used.
    pub fn step(&mut self) -> Result<Vec<Vec<f64>>> {
        let mu = self.gains()?;
        for (i, agent) in self.agents.iter_mut().enumerate() {
            let absorbed: f64 = mu[i]
                .iter()
                .enumerate()
                .map(|(j, x)| self.config.weight(i, j) * x)
                .sum();
            agent.m = match self.config.memory {
                Memory::LongTerm => agent.m + absorbed,
                Memory::ShortTerm => absorbed,
            };
            if !agent.m.is_finite() {
                return Err(Error::NonFinite(format!("memory functional of agent {i}")));
            }
            agent.p = agent
                .f
                .iter()
                .zip(&agent.q0)
                .map(|(f, q)| f + attraction_discount(*q, agent.m))
                .collect();
        }
        self.step += 1;
        Ok(mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RationalConvention,
    CommonConvention,
    GroupConventions,
    EverlastingFluctuations,
    /// Neither converged nor recurrent within the horizon.
    Unresolved,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::RationalConvention => "rational-convention",
            Regime::CommonConvention => "common-convention",
            Regime::GroupConventions => "group-conventions",
            Regime::EverlastingFluctuations => "everlasting-fluctuations",
            Regime::Unresolved => "unresolved",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Settings of the regime classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSettings {
    pub step_tol: f64,
    pub window: usize,
    pub agreement: f64,
    pub recurrence_tol: f64,
    pub max_period: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            step_tol: 1e-8,
            window: 50,
            agreement: 1e-3,
            recurrence_tol: 1e-6,
            max_period: 100,
        }
    }
}

fn distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

fn label_limit(last: &[Vec<f64>], f: &[Vec<f64>], agreement: f64) -> Regime {
    if distance(last, f) <= agreement {
        return Regime::RationalConvention;
    }
    let agree = last
        .iter()
        .all(|p| distance(std::slice::from_ref(p), &last[..1]) <= agreement);
    if agree {
        Regime::CommonConvention
    } else {
        Regime::GroupConventions
    }
}

/// Upper estimate of the distance still to travel for a series that
/// approaches its limit monotonically with power-law or faster decaying
/// steps. With `Δ_t ≈ C t^{−k}` the tail sum is about `Δ_t · t / (k − 1)`.
/// Returns `None` for oscillating, growing or too slowly decaying tails.
fn projected_drift(series: &[Vec<Vec<f64>>], window: usize) -> Option<f64> {
    let len = series.len();
    if window < 2 || len < 4 * window {
        return None;
    }
    let t = len - 1;
    let step = |s: usize| distance(&series[s], &series[s - 1]);
    let last = step(t);
    if last == 0.0 {
        return Some(0.0);
    }
    for s in t - window + 2..=t {
        if step(s) > step(s - 1) * (1.0 + 1e-9) {
            return None;
        }
        for (a, (b, c)) in series[s].iter().zip(series[s - 1].iter().zip(&series[s - 2])) {
            for (x, (y, z)) in a.iter().zip(b.iter().zip(c)) {
                if (x - y) * (y - z) < 0.0 {
                    return None;
                }
            }
        }
    }
    let h = t / 2;
    let earlier = step(h);
    if earlier <= last {
        return None;
    }
    let k = (earlier / last).ln() / (t as f64 / h as f64).ln();
    if k <= 1.05 {
        return None;
    }
    Some(last * t as f64 / (k - 1.0))
}

/// Labels a probability series `series[t][agent][alternative]`.
///
/// Converged series (step changes below `step_tol` over the last `window`
/// steps) are rational when every agent sits within `agreement` of its `f`,
/// common when all agents agree, and group conventions otherwise. Slowly
/// converging monotone tails are labeled the same way once their projected
/// remaining drift is below `agreement`. A series that does not converge
/// but revisits its recent states with some period of at least two
/// fluctuates everlastingly.
pub fn classify(series: &[Vec<Vec<f64>>], f: &[Vec<f64>], settings: &ClassifierSettings) -> Regime {
    let len = series.len();
    if len > settings.window {
        let converged = (len - settings.window..len)
            .all(|t| distance(&series[t], &series[t - 1]) < settings.step_tol);
        if converged {
            return label_limit(&series[len - 1], f, settings.agreement);
        }
    }
    if let Some(drift) = projected_drift(series, settings.window) {
        if drift < settings.agreement {
            return label_limit(&series[len - 1], f, settings.agreement);
        }
    }
    let probe = 10usize;
    for period in 2..=settings.max_period {
        if len < period + probe + 1 {
            break;
        }
        let recurs = (len - probe..len)
            .all(|t| distance(&series[t], &series[t - period]) < settings.recurrence_tol);
        let moving = distance(&series[len - 1], &series[len - 2]) >= settings.recurrence_tol;
        if recurs && moving {
            return Regime::EverlastingFluctuations;
        }
    }
    Regime::Unresolved
}

/// Full time series of a network run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `p[t][agent][alternative]`.
    pub p: Vec<Vec<Vec<f64>>>,
    /// `q[t][agent][alternative]`.
    pub q: Vec<Vec<Vec<f64>>>,
    /// `m[t][agent]`.
    pub m: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub regime: Regime,
}

impl Trajectory {
    pub fn final_probabilities(&self) -> &[Vec<f64>] {
        self.p.last().expect("trajectory holds the initial row")
    }
}

pub fn simulate(config: &NetworkConfig, agents: Vec<AgentState>) -> Result<Trajectory> {
    simulate_with(config, agents, &ClassifierSettings::default())
}

pub fn simulate_with(
    config: &NetworkConfig,
    agents: Vec<AgentState>,
    settings: &ClassifierSettings,
) -> Result<Trajectory> {
    let mut net = Network::new(config.clone(), agents)?;
    let f: Vec<Vec<f64>> = net.agents.iter().map(|a| a.f.clone()).collect();
    let record = |net: &Network, traj: &mut Trajectory| {
        traj.times.push(net.time());
        traj.p.push(net.agents.iter().map(|a| a.p.clone()).collect());
        traj.q.push(net.agents.iter().map(AgentState::q).collect());
        traj.m.push(net.agents.iter().map(|a| a.m).collect());
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(config.horizon + 1),
        p: Vec::with_capacity(config.horizon + 1),
        q: Vec::with_capacity(config.horizon + 1),
        m: Vec::with_capacity(config.horizon + 1),
        f: f.clone(),
        regime: Regime::Unresolved,
    };
    record(&net, &mut traj);
    for _ in 0..config.horizon {
        net.step()?;
        record(&net, &mut traj);
    }
    traj.regime = classify(&traj.p, &f, settings);
    Ok(traj)
}
