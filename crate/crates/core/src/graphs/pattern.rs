//! Communication patterns: infinite, reproducible sequences of round graphs.
//!
//! Every generator is a pure function of `(seed, round)`, so a pattern is
//! never materialised; `graph(t)` recomputes the round graph on demand.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CommGraph;
use crate::error::{Error, Result};
use crate::rng::derived_rng;

const TAG_ROOTED: u64 = 0x726f_6f74;
const TAG_NONSPLIT: u64 = 0x6e73_706c;
const TAG_BIDIR: u64 = 0x6269_6469;
const TAG_BIDIR_BASE: u64 = 0x6261_7365;

/// Per-round probability that a base edge of an intermittent pattern shows
/// up outside its guaranteed slot.
const INTERMITTENT_EXTRA_RATE: f64 = 0.15;

/// Network model a pattern is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkModelKind {
    Nonsplit,
    Rooted,
    BidirectionalIntermittent,
    FixedGraph,
    Custom,
}

/// Serializable description of a pattern. The agent count comes from the
/// enclosing run; generator seeds default to the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", from = "PatternSpecRepr")]
pub enum PatternSpec {
    Fixed {
        graph: CommGraph,
    },
    Complete,
    SelfLoops,
    RandomRooted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    RandomNonsplit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    RotatingStar,
    BidirectionalIntermittent {
        period: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// A finite list of graphs repeated cyclically, starting at round 1.
    Custom {
        graphs: Vec<CommGraph>,
    },
}

/// Input form of [`PatternSpec`]. Unit variants are spelled as empty
/// struct variants so that unknown keys are rejected for them as well.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum PatternSpecRepr {
    Fixed {
        graph: CommGraph,
    },
    Complete {},
    SelfLoops {},
    RandomRooted {
        #[serde(default)]
        seed: Option<u64>,
    },
    RandomNonsplit {
        #[serde(default)]
        seed: Option<u64>,
    },
    RotatingStar {},
    BidirectionalIntermittent {
        period: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Custom {
        graphs: Vec<CommGraph>,
    },
}

impl From<PatternSpecRepr> for PatternSpec {
    fn from(r: PatternSpecRepr) -> Self {
        match r {
            PatternSpecRepr::Fixed { graph } => PatternSpec::Fixed { graph },
            PatternSpecRepr::Complete {} => PatternSpec::Complete,
            PatternSpecRepr::SelfLoops {} => PatternSpec::SelfLoops,
            PatternSpecRepr::RandomRooted { seed } => PatternSpec::RandomRooted { seed },
            PatternSpecRepr::RandomNonsplit { seed } => PatternSpec::RandomNonsplit { seed },
            PatternSpecRepr::RotatingStar {} => PatternSpec::RotatingStar,
            PatternSpecRepr::BidirectionalIntermittent { period, seed } => {
                PatternSpec::BidirectionalIntermittent { period, seed }
            }
            PatternSpecRepr::Custom { graphs } => PatternSpec::Custom { graphs },
        }
    }
}

impl PatternSpec {
    pub fn build(&self, n: usize, default_seed: u64) -> Result<CommPattern> {
        match self {
            PatternSpec::Fixed { graph } => {
                if graph.n() != n {
                    return Err(Error::InvalidArgument(format!(
                        "fixed graph has {} nodes, run has {n}",
                        graph.n()
                    )));
                }
                Ok(CommPattern::fixed(graph.clone()))
            }
            PatternSpec::Complete => Ok(CommPattern::fixed(CommGraph::complete(n))),
            PatternSpec::SelfLoops => Ok(CommPattern::fixed(CommGraph::new(n))),
            PatternSpec::RandomRooted { seed } => {
                CommPattern::random_rooted(n, seed.unwrap_or(default_seed))
            }
            PatternSpec::RandomNonsplit { seed } => {
                CommPattern::random_nonsplit(n, seed.unwrap_or(default_seed))
            }
            PatternSpec::RotatingStar => CommPattern::adversarial_rotating_star(n),
            PatternSpec::BidirectionalIntermittent { period, seed } => {
                CommPattern::bidirectional_intermittent(n, *period, seed.unwrap_or(default_seed))
            }
            PatternSpec::Custom { graphs } => CommPattern::cycle(graphs.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Source {
    Fixed(CommGraph),
    RandomRooted { seed: u64 },
    RandomNonsplit { seed: u64 },
    RotatingStar,
    Intermittent {
        period: usize,
        seed: u64,
        base: Vec<(usize, usize)>,
        phases: Vec<usize>,
    },
    Cycle(Vec<CommGraph>),
}

/// An infinite communication pattern on `n` agents.
#[derive(Clone, Debug, PartialEq)]
pub struct CommPattern {
    n: usize,
    source: Source,
}

impl CommPattern {
    /// The same graph in every round.
    pub fn fixed(g: CommGraph) -> Self {
        CommPattern {
            n: g.n(),
            source: Source::Fixed(g),
        }
    }

    /// Round graphs are random rooted graphs: a random spanning out-tree,
    /// sometimes with extra random edges.
    pub fn random_rooted(n: usize, seed: u64) -> Result<Self> {
        check_n(n)?;
        Ok(CommPattern {
            n,
            source: Source::RandomRooted { seed },
        })
    }

    /// Round graphs are random nonsplit graphs: a sparse random graph
    /// repaired pair by pair until any two nodes share an in-neighbor.
    pub fn random_nonsplit(n: usize, seed: u64) -> Result<Self> {
        check_n(n)?;
        Ok(CommPattern {
            n,
            source: Source::RandomNonsplit { seed },
        })
    }

    /// Round `t` is the out-star centred at agent `t mod n`.
    pub fn adversarial_rotating_star(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(CommPattern {
            n,
            source: Source::RotatingStar,
        })
    }

    /// Bidirectional graphs drawn from a fixed connected base graph. Every
    /// base edge appears in both directions at least once in any `period`
    /// consecutive rounds; no other edges ever appear.
    pub fn bidirectional_intermittent(n: usize, period: usize, seed: u64) -> Result<Self> {
        check_n(n)?;
        if period == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        let mut rng = derived_rng(seed, &[TAG_BIDIR_BASE]);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut base = Vec::new();
        for i in 1..n {
            let parent = order[rng.random_range(0..i)];
            base.push(ordered(parent, order[i]));
        }
        for _ in 0..n / 2 {
            let p = rng.random_range(0..n);
            let q = rng.random_range(0..n);
            let e = ordered(p, q);
            if p != q && !base.contains(&e) {
                base.push(e);
            }
        }
        base.sort_unstable();
        let phases = base.iter().map(|_| rng.random_range(0..period)).collect();
        Ok(CommPattern {
            n,
            source: Source::Intermittent {
                period,
                seed,
                base,
                phases,
            },
        })
    }

    /// Repeats `graphs` cyclically: round `t` uses `graphs[(t - 1) mod len]`.
    pub fn cycle(graphs: Vec<CommGraph>) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or_else(|| Error::InvalidArgument("custom pattern needs at least one graph".into()))?;
        let n = first.n();
        if graphs.iter().any(|g| g.n() != n) {
            return Err(Error::InvalidArgument(
                "custom pattern graphs disagree on n".into(),
            ));
        }
        Ok(CommPattern {
            n,
            source: Source::Cycle(graphs),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> NetworkModelKind {
        match self.source {
            Source::Fixed(_) => NetworkModelKind::FixedGraph,
            Source::RandomRooted { .. } | Source::RotatingStar => NetworkModelKind::Rooted,
            Source::RandomNonsplit { .. } => NetworkModelKind::Nonsplit,
            Source::Intermittent { .. } => NetworkModelKind::BidirectionalIntermittent,
            Source::Cycle(_) => NetworkModelKind::Custom,
        }
    }

    /// Connectivity period of an intermittent pattern.
    pub fn period(&self) -> Option<usize> {
        match self.source {
            Source::Intermittent { period, .. } => Some(period),
            _ => None,
        }
    }

    /// `true` if every graph the pattern can emit is nonsplit.
    pub fn guarantees_nonsplit(&self) -> bool {
        match &self.source {
            Source::RandomNonsplit { .. } => true,
            Source::Fixed(g) => g.is_nonsplit(),
            Source::Cycle(gs) => gs.iter().all(CommGraph::is_nonsplit),
            Source::RotatingStar => true,
            _ => self.n <= 1,
        }
    }

    /// `true` if every graph the pattern can emit is rooted.
    pub fn guarantees_rooted(&self) -> bool {
        match &self.source {
            Source::RandomRooted { .. } | Source::RandomNonsplit { .. } | Source::RotatingStar => {
                true
            }
            Source::Fixed(g) => g.is_rooted(),
            Source::Cycle(gs) => gs.iter().all(CommGraph::is_rooted),
            Source::Intermittent { .. } => self.n <= 1,
        }
    }

    /// The communication graph of round `round`.
    pub fn graph(&self, round: u64) -> CommGraph {
        let n = self.n;
        match &self.source {
            Source::Fixed(g) => g.clone(),
            Source::RotatingStar => {
                CommGraph::out_star(n, (round % n as u64) as usize).expect("center in range")
            }
            Source::Cycle(gs) => {
                let len = gs.len() as u64;
                gs[((round + len - 1) % len) as usize].clone()
            }
            Source::RandomRooted { seed } => random_rooted_graph(n, *seed, round),
            Source::RandomNonsplit { seed } => random_nonsplit_graph(n, *seed, round),
            Source::Intermittent {
                period,
                seed,
                base,
                phases,
            } => {
                let mut rng = derived_rng(*seed, &[TAG_BIDIR, round]);
                let slot = (round % *period as u64) as usize;
                let mut g = CommGraph::new(n);
                for (&(p, q), &phase) in base.iter().zip(phases) {
                    let coin = rng.random::<f64>() < INTERMITTENT_EXTRA_RATE;
                    if phase == slot || coin {
                        g.set(p, q);
                        g.set(q, p);
                    }
                }
                g
            }
        }
    }

    /// Graphs of rounds `1..=rounds`.
    pub fn prefix(&self, rounds: u64) -> Vec<CommGraph> {
        (1..=rounds).map(|t| self.graph(t)).collect()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

fn ordered(p: usize, q: usize) -> (usize, usize) {
    (p.min(q), p.max(q))
}

fn random_rooted_graph(n: usize, seed: u64, round: u64) -> CommGraph {
    let mut rng = derived_rng(seed, &[TAG_ROOTED, round]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut g = CommGraph::new(n);
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        g.set(parent, order[i]);
    }
    // half of the rounds are bare trees, the rest get some extra edges
    let density = if rng.random::<bool>() {
        0.0
    } else {
        rng.random::<f64>() * 0.3
    };
    if density > 0.0 {
        for p in 0..n {
            for q in 0..n {
                if p != q && rng.random::<f64>() < density {
                    g.set(p, q);
                }
            }
        }
    }
    g
}

fn random_nonsplit_graph(n: usize, seed: u64, round: u64) -> CommGraph {
    let mut rng = derived_rng(seed, &[TAG_NONSPLIT, round]);
    let density = rng.random::<f64>() * 0.4;
    let mut g = CommGraph::new(n);
    for p in 0..n {
        for q in 0..n {
            if p != q && rng.random::<f64>() < density {
                g.set(p, q);
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .collect();
    pairs.shuffle(&mut rng);
    for (p, q) in pairs {
        let shared = g
            .in_row(p)
            .iter()
            .zip(g.in_row(q))
            .any(|(a, b)| a & b != 0);
        if !shared {
            let r = rng.random_range(0..n);
            g.set(r, p);
            g.set(r, q);
        }
    }
    g
}

/// Finite stand-in for the graph of edges that occur infinitely often.
///
/// Rounds `1..=horizon` are cut into consecutive blocks of `window` rounds
/// (a trailing partial block is ignored). An edge is kept iff it occurs in
/// every block.
pub fn infinitely_often_union(
    pattern: &CommPattern,
    window: usize,
    horizon: u64,
) -> Result<CommGraph> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let blocks = horizon / window as u64;
    if blocks == 0 {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} shorter than window {window}"
        )));
    }
    let n = pattern.n();
    let mut keep = vec![true; n * n];
    for b in 0..blocks {
        let mut seen = vec![false; n * n];
        for t in 1..=window as u64 {
            let g = pattern.graph(b * window as u64 + t);
            for (p, q) in g.edges() {
                seen[p * n + q] = true;
            }
        }
        for (k, s) in keep.iter_mut().zip(&seen) {
            *k &= *s;
        }
    }
    let edges: Vec<_> = (0..n * n)
        .filter(|&i| keep[i])
        .map(|i| (i / n, i % n))
        .collect();
    CommGraph::from_edges(n, &edges)
}
