//! Deterministic round engine.
//!
//! Round `t` (1-based) uses graph `G_t` of the pattern and maps the
//! configuration `x(t-1)` to `x(t)`. All agents read the pre-round
//! snapshot, so evaluation order inside a round does not matter.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{transition, AgentState, AlgorithmKind, Message, RoundContext, UpdateOptions};
use crate::error::{Error, Result};
use crate::geometry::{realized_alpha, Point};
use crate::graphs::{AgentId, CommGraph, CommPattern, PatternSpec};
use crate::rng::{derive_seed, derived_rng};

/// Component ranges at or below this are treated as zero.
pub const DELTA_FLOOR: f64 = 1e-30;

pub const DEFAULT_MAX_ROUNDS: u64 = 100_000;

const TAG_PATTERN: u64 = 0x7061_7474;
const TAG_INITIAL: u64 = 0x696e_6974;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<Point>,
    pub round: u64,
}

impl Configuration {
    pub fn new(positions: Vec<Point>, round: u64) -> Result<Self> {
        let d = positions
            .first()
            .ok_or_else(|| Error::InvalidArgument("configuration needs at least one agent".into()))?
            .dim();
        if d == 0 || positions.iter().any(|p| p.dim() != d) {
            return Err(Error::InvalidArgument(
                "all positions must share a positive dimension".into(),
            ));
        }
        Ok(Configuration { positions, round })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        self.positions[0].dim()
    }

    /// Per-component diameters `max_p x_p,k - min_p x_p,k`.
    pub fn deltas(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let (lo, hi) = self
                    .positions
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])));
                hi - lo
            })
            .collect()
    }

    /// Largest Euclidean distance between two agents.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, p) in self.positions.iter().enumerate() {
            for q in &self.positions[i + 1..] {
                best = best.max(p.distance(q));
            }
        }
        best
    }
}

/// Where the initial positions come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Explicit {
        positions: Vec<Point>,
    },
    /// Independent uniform positions in `[0, 1]^d`.
    UniformBox {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Uniform on the grid `2^-bits * Z` inside `[0, 1]^d`. Midpoint
    /// arithmetic on such values stays exact for roughly `52 - bits` rounds.
    DyadicBox {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        bits: u32,
    },
}

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub n: usize,
    pub d: usize,
    pub algorithm: AlgorithmKind,
    #[serde(default)]
    pub options: UpdateOptions,
    pub pattern: PatternSpec,
    pub initial: InitialConfig,
    /// Relative accuracy: stop once every component range is at most
    /// `epsilon` times its initial value.
    pub epsilon: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    /// Fallback seed for pattern and initial positions that carry none.
    #[serde(default)]
    pub seed: u64,
}

impl RunSpec {
    pub fn new(n: usize, d: usize, algorithm: AlgorithmKind, pattern: PatternSpec, seed: u64) -> Self {
        RunSpec {
            n,
            d,
            algorithm,
            options: UpdateOptions::default(),
            pattern,
            initial: InitialConfig::UniformBox { seed: None },
            epsilon: 1e-6,
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
        }
        self.algorithm.validate(self.n, self.d)?;
        if let InitialConfig::Explicit { positions } = &self.initial {
            if positions.len() != self.n || positions.iter().any(|p| p.dim() != self.d) {
                return Err(Error::InvalidArgument(format!(
                    "explicit initial configuration must hold {} points of dimension {}",
                    self.n, self.d
                )));
            }
        }
        Ok(())
    }

    pub fn build_pattern(&self) -> Result<CommPattern> {
        self.pattern.build(self.n, derive_seed(self.seed, &[TAG_PATTERN]))
    }

    pub fn initial_configuration(&self) -> Result<Configuration> {
        let positions = match &self.initial {
            InitialConfig::Explicit { positions } => positions.clone(),
            InitialConfig::UniformBox { seed } => {
                let mut rng = derived_rng(seed.unwrap_or(self.seed), &[TAG_INITIAL]);
                (0..self.n)
                    .map(|_| Point::new((0..self.d).map(|_| rng.random::<f64>()).collect()))
                    .collect::<Result<_>>()?
            }
            InitialConfig::DyadicBox { seed, bits } => {
                if !(1..=52).contains(bits) {
                    return Err(Error::InvalidArgument(format!("dyadic grid needs 1..=52 bits, got {bits}")));
                }
                let top = 1u64 << bits;
                let mut rng = derived_rng(seed.unwrap_or(self.seed), &[TAG_INITIAL]);
                (0..self.n)
                    .map(|_| Point::new((0..self.d).map(|_| rng.random_range(0..=top) as f64 / top as f64).collect()))
                    .collect::<Result<_>>()?
            }
        };
        Configuration::new(positions, 0)
    }
}

/// First round meeting the accuracy target, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TEpsRepr", into = "TEpsRepr")]
pub enum TEps {
    Reached(u64),
    NotReached,
}

impl TEps {
    pub fn rounds(self) -> Option<u64> {
        match self {
            TEps::Reached(t) => Some(t),
            TEps::NotReached => None,
        }
    }
}

impl fmt::Display for TEps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TEps::Reached(t) => write!(f, "{t}"),
            TEps::NotReached => f.write_str("not reached"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TEpsRepr {
    Rounds(u64),
    Label(String),
}

impl TryFrom<TEpsRepr> for TEps {
    type Error = String;

    fn try_from(r: TEpsRepr) -> std::result::Result<Self, String> {
        match r {
            TEpsRepr::Rounds(t) => Ok(TEps::Reached(t)),
            TEpsRepr::Label(s) if s == "not reached" => Ok(TEps::NotReached),
            TEpsRepr::Label(s) => Err(format!("expected a round count or \"not reached\", got \"{s}\"")),
        }
    }
}

impl From<TEps> for TEpsRepr {
    fn from(t: TEps) -> Self {
        match t {
            TEps::Reached(t) => TEpsRepr::Rounds(t),
            TEps::NotReached => TEpsRepr::Label("not reached".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub t_eps: TEps,
    /// `(max_k delta_k(T) / delta_k(0))^(1/T)` over the components that
    /// start spread out; a finite-horizon proxy, not the asymptotic rate.
    pub empirical_rate: Option<f64>,
    /// Worst-case round bound for this scenario, when one is known.
    pub bound_t: Option<u64>,
    pub converged: bool,
    pub rounds_run: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub spec: RunSpec,
    /// `configs[t]` is `x(t)`.
    pub configs: Vec<Configuration>,
    /// `deltas[t][k]` is the range of component `k` in `x(t)`.
    pub deltas: Vec<Vec<f64>>,
    /// Realized safeness of each agent at each averaging round, measured
    /// against the positions at the start of the macro-round and the
    /// product of its graphs. `None` on gathering rounds, on round 0 and
    /// where every component range is below [`DELTA_FLOOR`].
    pub margins: Vec<Vec<Option<f64>>>,
    pub metrics: Metrics,
}

impl RunTrace {
    pub fn rounds(&self) -> u64 {
        self.configs.len() as u64 - 1
    }

    pub fn final_config(&self) -> &Configuration {
        self.configs.last().expect("trace holds x(0)")
    }

    /// Averaging period of the traced algorithm.
    pub fn period(&self) -> usize {
        self.spec.algorithm.period(self.spec.n)
    }
}

/// One synchronous round on graph `g`.
pub fn step(
    config: &Configuration,
    g: &CommGraph,
    states: &[AgentState],
    kind: &AlgorithmKind,
    opts: &UpdateOptions,
) -> Result<(Configuration, Vec<AgentState>)> {
    let n = config.n();
    if g.n() != n || states.len() != n {
        return Err(Error::InvalidArgument(format!(
            "size mismatch: configuration {n}, graph {}, states {}",
            g.n(),
            states.len()
        )));
    }
    for (p, (s, x)) in states.iter().zip(&config.positions).enumerate() {
        if s.x.dim() != x.dim() || s.x != *x {
            return Err(Error::InvalidArgument(format!(
                "state of agent {p} does not match its configured position"
            )));
        }
    }
    let outbox: Vec<Message> = states
        .iter()
        .enumerate()
        .map(|(p, s)| s.message(AgentId(p)))
        .collect();
    let round = config.round + 1;
    let mut next = Vec::with_capacity(n);
    for (p, state) in states.iter().enumerate() {
        let received: Vec<Message> = g
            .in_neighbors(AgentId(p))
            .into_iter()
            .map(|q| outbox[q.0].clone())
            .collect();
        let ctx = RoundContext { agent: AgentId(p), round, n };
        next.push(transition(kind, opts, &ctx, state, &received)?);
    }
    let positions = next.iter().map(|s| s.x.clone()).collect();
    Ok((Configuration { positions, round }, next))
}

fn agent_margins(before: &Configuration, g: &CommGraph, after: &Configuration) -> Result<Vec<Option<f64>>> {
    (0..before.n())
        .map(|p| {
            let pts: Vec<Point> = g
                .in_neighbors(AgentId(p))
                .into_iter()
                .map(|q| before.positions[q.0].clone())
                .collect();
            let per = realized_alpha(&pts, &after.positions[p], DELTA_FLOOR)?;
            Ok(per.into_iter().flatten().reduce(f64::min))
        })
        .collect()
}

/// Executes `spec` until the accuracy target or `max_rounds`.
pub fn run(spec: &RunSpec) -> Result<RunTrace> {
    spec.validate()?;
    let pattern = spec.build_pattern()?;
    let init = spec.initial_configuration()?;
    let kind = spec.algorithm;
    let n = spec.n;
    let period = kind.period(n) as u64;

    let delta0 = init.deltas();
    let active: Vec<usize> = (0..spec.d).filter(|&k| delta0[k] > DELTA_FLOOR).collect();
    let reached = |delta: &[f64]| active.iter().all(|&k| delta[k] <= spec.epsilon * delta0[k]);

    let mut states: Vec<AgentState> = init
        .positions
        .iter()
        .map(|x| AgentState::new(kind.rule, x.clone()))
        .collect();
    let mut t_eps = reached(&delta0).then_some(0);
    let mut configs = vec![init];
    let mut deltas = vec![delta0.clone()];
    let mut margins = vec![vec![None; n]];
    let mut macro_graph = CommGraph::new(n);
    let mut macro_start = 0usize;

    let mut t = 0u64;
    while t_eps.is_none() && t < spec.max_rounds {
        t += 1;
        let g = pattern.graph(t);
        let (cfg, next) = step(configs.last().expect("nonempty"), &g, &states, &kind, &spec.options)?;
        states = next;
        macro_graph = macro_graph.product(&g)?;
        if t % period == 0 {
            margins.push(agent_margins(&configs[macro_start], &macro_graph, &cfg)?);
            macro_graph = CommGraph::new(n);
            macro_start = t as usize;
        } else {
            margins.push(vec![None; n]);
        }
        let delta = cfg.deltas();
        if reached(&delta) {
            t_eps = Some(t);
        }
        deltas.push(delta);
        configs.push(cfg);
    }

    let metrics = summarize(spec, &pattern, &deltas, t_eps, t);
    Ok(RunTrace {
        spec: spec.clone(),
        configs,
        deltas,
        margins,
        metrics,
    })
}

fn summarize(spec: &RunSpec, pattern: &CommPattern, deltas: &[Vec<f64>], t_eps: Option<u64>, t: u64) -> Metrics {
    let delta0 = &deltas[0];
    let active: Vec<usize> = (0..delta0.len()).filter(|&k| delta0[k] > DELTA_FLOOR).collect();
    let rate = if t == 0 || active.is_empty() {
        None
    } else {
        let last = deltas.last().expect("nonempty");
        let worst = active
            .iter()
            .map(|&k| last[k] / delta0[k])
            .fold(0.0_f64, f64::max);
        Some(worst.powf(1.0 / t as f64))
    };
    Metrics {
        t_eps: t_eps.map_or(TEps::NotReached, TEps::Reached),
        empirical_rate: rate,
        bound_t: theorem_bound_for(spec, pattern, delta0).ok(),
        converged: t_eps.is_some(),
        rounds_run: t,
    }
}

impl RunTrace {
    /// Rebuilds a trace from stored positions `x(0), x(1), ...`, recomputing
    /// ranges, margins and metrics as [`run`] would.
    pub fn from_positions(spec: RunSpec, configs: Vec<Configuration>) -> Result<RunTrace> {
        spec.validate()?;
        let first = configs
            .first()
            .ok_or_else(|| Error::InvalidArgument("trace has no rounds".into()))?;
        for (t, c) in configs.iter().enumerate() {
            if c.round != t as u64 || c.n() != spec.n || c.dim() != spec.d {
                return Err(Error::InvalidArgument(format!(
                    "trace round {t} does not match n={} d={} (got round {}, n={}, d={})",
                    spec.n,
                    spec.d,
                    c.round,
                    c.n(),
                    c.dim()
                )));
            }
        }
        let pattern = spec.build_pattern()?;
        let period = spec.algorithm.period(spec.n) as u64;
        let deltas: Vec<Vec<f64>> = configs.iter().map(Configuration::deltas).collect();
        let delta0 = first.deltas();
        let active: Vec<usize> = (0..spec.d).filter(|&k| delta0[k] > DELTA_FLOOR).collect();
        let t_eps = deltas
            .iter()
            .position(|d| active.iter().all(|&k| d[k] <= spec.epsilon * delta0[k]))
            .map(|t| t as u64);
        let mut margins = vec![vec![None; spec.n]; configs.len()];
        let mut t = period;
        while t < configs.len() as u64 {
            let mut g = CommGraph::new(spec.n);
            for r in t - period + 1..=t {
                g = g.product(&pattern.graph(r))?;
            }
            margins[t as usize] = agent_margins(&configs[(t - period) as usize], &g, &configs[t as usize])?;
            t += period;
        }
        let rounds = configs.len() as u64 - 1;
        let metrics = summarize(&spec, &pattern, &deltas, t_eps, rounds);
        Ok(RunTrace {
            spec,
            configs,
            deltas,
            margins,
            metrics,
        })
    }
}

/// Component-wise ratios `delta_k(s L) / delta_k((s-1) L)` for every
/// complete macro-round `s`; 0 where the denominator is below
/// [`DELTA_FLOOR`].
pub fn measure_contraction(trace: &RunTrace, macro_period: usize) -> Result<Vec<Vec<f64>>> {
    if macro_period == 0 {
        return Err(Error::InvalidArgument("macro period must be at least 1".into()));
    }
    let l = macro_period;
    Ok((1..=(trace.deltas.len() - 1) / l)
        .map(|s| {
            let prev = &trace.deltas[(s - 1) * l];
            let cur = &trace.deltas[s * l];
            prev.iter()
                .zip(cur)
                .map(|(&a, &b)| if a < DELTA_FLOOR { 0.0 } else { b / a })
                .collect()
        })
        .collect())
}

/// Which worst-case bound covers a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundKind {
    /// Every round is nonsplit and every averaging step is `alpha`-safe:
    /// one contraction by `1 - alpha` per macro-round.
    Nonsplit { alpha: f64, period: usize },
    /// Every round is rooted and each macro-round spans at least `n - 1`
    /// rounds, so its product graph is nonsplit.
    RootedAmortized { alpha: f64, period: usize },
}

impl BoundKind {
    pub fn alpha(&self) -> f64 {
        match *self {
            BoundKind::Nonsplit { alpha, .. } | BoundKind::RootedAmortized { alpha, .. } => alpha,
        }
    }

    pub fn period(&self) -> usize {
        match *self {
            BoundKind::Nonsplit { period, .. } | BoundKind::RootedAmortized { period, .. } => period,
        }
    }

    /// `period * ceil(log_{1/(1-alpha)}(1/epsilon))`.
    pub fn rounds(&self, epsilon: f64) -> u64 {
        self.period() as u64 * ceil_log(1.0 / (1.0 - self.alpha()), 1.0 / epsilon)
    }
}

/// `ceil(log_base(x))`, with a little slack so exact powers are not
/// pushed up by rounding; 0 for `x <= 1`.
pub fn ceil_log(base: f64, x: f64) -> u64 {
    if x <= 1.0 {
        return 0;
    }
    (x.ln() / base.ln() - 1e-9).ceil().max(0.0) as u64
}

/// The bound matching `spec` on `pattern`, if any.
pub fn matching_bound(spec: &RunSpec, pattern: &CommPattern) -> Option<BoundKind> {
    let kind = spec.algorithm;
    kind.validate(spec.n, spec.d).ok()?;
    let alpha = kind.alpha(spec.n, spec.d);
    let period = kind.period(spec.n);
    if pattern.guarantees_nonsplit() {
        Some(BoundKind::Nonsplit { alpha, period })
    } else if kind.amortized && period + 1 >= spec.n && pattern.guarantees_rooted() {
        Some(BoundKind::RootedAmortized { alpha, period })
    } else {
        None
    }
}

/// Worst-case number of rounds to reach `spec.epsilon` relative accuracy.
pub fn theorem_bound(spec: &RunSpec, delta0: &[f64]) -> Result<u64> {
    let pattern = spec.build_pattern()?;
    theorem_bound_for(spec, &pattern, delta0)
}

fn theorem_bound_for(spec: &RunSpec, pattern: &CommPattern, delta0: &[f64]) -> Result<u64> {
    let bound = matching_bound(spec, pattern).ok_or_else(|| {
        Error::Unsupported(format!(
            "no convergence bound for {} on a {:?} pattern",
            spec.algorithm,
            pattern.kind()
        ))
    })?;
    if spec.n <= 1 || delta0.iter().all(|&d| d <= DELTA_FLOOR) {
        return Ok(0);
    }
    Ok(bound.rounds(spec.epsilon))
}
