//! Consensus update rules as per-agent state machines.
//!
//! Every rule is a convex combination of the positions an agent hears from.
//! The amortized variants run a value-gathering phase: for `period - 1`
//! rounds an agent only merges what it hears into its memory, and on rounds
//! `t ≡ 0 (mod period)` it applies the base rule to the gathered memory and
//! resets the memory to its new position. With `period == 1` this is exactly
//! the non-amortized rule.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, component_extrema, convex_hull_with, Point, Tolerances};
use crate::graphs::AgentId;
use crate::rng::derived_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpdateRule {
    /// Mean of the received positions, counted with multiplicity.
    EqualNeighbor,
    /// Midpoint of the received range; one-dimensional only.
    MidPoint,
    /// Coordinate-wise midpoint of the received ranges; d <= 2 only.
    ComponentMidPoint,
    /// Mean of one minimal and one maximal point per coordinate.
    ExtremePoint,
    /// Centroid of the convex hull of the received positions.
    Centroid,
}

impl UpdateRule {
    pub const ALL: [UpdateRule; 5] = [
        UpdateRule::EqualNeighbor,
        UpdateRule::MidPoint,
        UpdateRule::ComponentMidPoint,
        UpdateRule::ExtremePoint,
        UpdateRule::Centroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UpdateRule::EqualNeighbor => "equal-neighbor",
            UpdateRule::MidPoint => "midpoint",
            UpdateRule::ComponentMidPoint => "component-midpoint",
            UpdateRule::ExtremePoint => "extreme-point",
            UpdateRule::Centroid => "centroid",
        }
    }

    /// Safeness constant of one update with at most `n` senders in `R^d`.
    pub fn alpha(self, n: usize, d: usize) -> f64 {
        match self {
            UpdateRule::EqualNeighbor => 1.0 / n.max(1) as f64,
            UpdateRule::MidPoint | UpdateRule::ComponentMidPoint => 0.5,
            UpdateRule::ExtremePoint => 1.0 / (2 * d.max(1)) as f64,
            UpdateRule::Centroid => 1.0 / (d + 1) as f64,
        }
    }
}

/// An update rule plus its amortization setting.
///
/// Textual form: `"<rule>"`, `"<rule>+amortized"` or `"<rule>+amortized:<period>"`,
/// e.g. `"centroid+amortized:5"`. Without an explicit period the amortized
/// variant gathers for `n - 1` rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AlgorithmKind {
    pub rule: UpdateRule,
    pub amortized: bool,
    pub period: Option<usize>,
}

impl AlgorithmKind {
    pub fn plain(rule: UpdateRule) -> Self {
        AlgorithmKind {
            rule,
            amortized: false,
            period: None,
        }
    }

    pub fn amortized(rule: UpdateRule) -> Self {
        AlgorithmKind {
            rule,
            amortized: true,
            period: None,
        }
    }

    pub fn with_period(mut self, period: usize) -> Self {
        self.amortized = true;
        self.period = Some(period);
        self
    }

    /// Number of rounds per averaging step.
    pub fn period(&self, n: usize) -> usize {
        if self.amortized {
            self.period.unwrap_or(n.saturating_sub(1)).max(1)
        } else {
            1
        }
    }

    /// Safeness constant of one averaging step.
    pub fn alpha(&self, n: usize, d: usize) -> f64 {
        self.rule.alpha(n, d)
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("n and d must be at least 1".into()));
        }
        match self.rule {
            UpdateRule::MidPoint if d != 1 => {
                return Err(Error::InvalidArgument(format!(
                    "midpoint is one-dimensional; got d = {d} (use component-midpoint, extreme-point or centroid)"
                )))
            }
            UpdateRule::ComponentMidPoint if d >= 3 => {
                return Err(Error::InvalidArgument(format!(
                    "component-midpoint is not a convex combination for d = {d} >= 3: \
                     the hull of (1,0,0), (0,1,0), (0,0,1) misses its component-wise midpoint (1/2,1/2,1/2)"
                )))
            }
            UpdateRule::EqualNeighbor if self.amortized => {
                return Err(Error::InvalidArgument(
                    "equal-neighbor weights depend on multiplicities and cannot be amortized".into(),
                ))
            }
            _ => {}
        }
        if self.period == Some(0) {
            return Err(Error::InvalidArgument("amortization period must be at least 1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule.name())?;
        if self.amortized {
            f.write_str("+amortized")?;
            if let Some(p) = self.period {
                write!(f, ":{p}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (rule_name, suffix) = match s.split_once('+') {
            Some((r, rest)) => (r, Some(rest)),
            None => (s, None),
        };
        let rule = UpdateRule::ALL
            .into_iter()
            .find(|r| r.name() == rule_name.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{rule_name}'")))?;
        let mut kind = AlgorithmKind::plain(rule);
        if let Some(suffix) = suffix {
            let (tag, period) = match suffix.split_once(':') {
                Some((t, p)) => (t, Some(p)),
                None => (suffix, None),
            };
            if tag.trim() != "amortized" {
                return Err(Error::InvalidArgument(format!("unknown algorithm suffix '{suffix}'")));
            }
            kind.amortized = true;
            if let Some(p) = period {
                let p: usize = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad amortization period '{p}'")))?;
                if p == 0 {
                    return Err(Error::InvalidArgument("amortization period must be at least 1".into()));
                }
                kind.period = Some(p);
            }
        }
        Ok(kind)
    }
}

impl TryFrom<String> for AlgorithmKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AlgorithmKind> for String {
    fn from(k: AlgorithmKind) -> Self {
        k.to_string()
    }
}

/// How ExtremePoint picks among points that tie on a coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", from = "TieBreakRepr")]
pub enum TieBreak {
    /// Lowest sender index, then lexicographic point order.
    #[default]
    LowestSender,
    /// Uniform among tied candidates, seeded by `(seed, round, agent, component)`.
    Random { seed: u64 },
}

/// Input form of [`TieBreak`] that rejects unknown keys on every variant.
#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
enum TieBreakRepr {
    LowestSender {},
    Random { seed: u64 },
}

impl From<TieBreakRepr> for TieBreak {
    fn from(r: TieBreakRepr) -> Self {
        match r {
            TieBreakRepr::LowestSender {} => TieBreak::LowestSender,
            TieBreakRepr::Random { seed } => TieBreak::Random { seed },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UpdateOptions {
    /// Keep only the frame of a Centroid agent's gathered point set.
    pub frame_reduction: bool,
    pub tie_break: TieBreak,
    pub tolerances: Tolerances,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        UpdateOptions {
            frame_reduction: true,
            tie_break: TieBreak::LowestSender,
            tolerances: Tolerances::default(),
        }
    }
}

/// Per-agent gathered memory, which is also what an agent sends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gathered {
    /// EqualNeighbor: the current position.
    Position(Point),
    /// MidPoint / ComponentMidPoint: coordinate-wise range.
    Range { lo: Vec<f64>, hi: Vec<f64> },
    /// ExtremePoint: `mins[i]` has minimal i-th coordinate, `maxs[i]` maximal.
    Extremes { mins: Vec<Point>, maxs: Vec<Point> },
    /// Centroid: a set of positions.
    Points(Vec<Point>),
}

impl Gathered {
    /// Memory right after an averaging step at position `x`.
    pub fn reset(rule: UpdateRule, x: &Point) -> Gathered {
        match rule {
            UpdateRule::EqualNeighbor => Gathered::Position(x.clone()),
            UpdateRule::MidPoint | UpdateRule::ComponentMidPoint => Gathered::Range {
                lo: x.coords().to_vec(),
                hi: x.coords().to_vec(),
            },
            UpdateRule::ExtremePoint => Gathered::Extremes {
                mins: vec![x.clone(); x.dim()],
                maxs: vec![x.clone(); x.dim()],
            },
            UpdateRule::Centroid => Gathered::Points(vec![x.clone()]),
        }
    }

    /// Number of reals carried by a message with this payload.
    pub fn payload_reals(&self) -> usize {
        match self {
            Gathered::Position(p) => p.dim(),
            Gathered::Range { lo, hi } => lo.len() + hi.len(),
            Gathered::Extremes { mins, maxs } => {
                mins.iter().chain(maxs).map(Point::dim).sum()
            }
            Gathered::Points(ps) => ps.iter().map(Point::dim).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: Point,
    pub memory: Gathered,
    /// Rounds since the last averaging step.
    pub round_in_macro: usize,
}

impl AgentState {
    pub fn new(rule: UpdateRule, x: Point) -> Self {
        let memory = Gathered::reset(rule, &x);
        AgentState {
            x,
            memory,
            round_in_macro: 0,
        }
    }

    pub fn message(&self, sender: AgentId) -> Message {
        Message {
            sender,
            payload: self.memory.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: AgentId,
    pub payload: Gathered,
}

/// Where and when a transition happens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundContext {
    pub agent: AgentId,
    /// 1-based round number.
    pub round: u64,
    pub n: usize,
}

/// One round of an (optionally amortized) rule for a single agent.
///
/// `received` holds this round's messages from every in-neighbor, the
/// agent's own message included.
pub fn transition(
    kind: &AlgorithmKind,
    opts: &UpdateOptions,
    ctx: &RoundContext,
    state: &AgentState,
    received: &[Message],
) -> Result<AgentState> {
    if received.is_empty() {
        return Err(Error::Protocol(format!(
            "agent {} received no messages (missing self-loop?)",
            ctx.agent
        )));
    }
    let d = state.x.dim();
    let mut order: Vec<&Message> = received.iter().collect();
    order.sort_by_key(|m| m.sender);

    let averaging = ctx.round % kind.period(ctx.n) as u64 == 0;
    let merged = merge(kind.rule, opts, ctx, d, &order)?;
    if !averaging {
        return Ok(AgentState {
            x: state.x.clone(),
            memory: merged,
            round_in_macro: state.round_in_macro + 1,
        });
    }
    let x = match (&merged, kind.rule) {
        (Gathered::Position(_), _) => {
            let pts: Vec<Point> = order
                .iter()
                .map(|m| match &m.payload {
                    Gathered::Position(p) => p.clone(),
                    _ => unreachable!("payloads checked in merge"),
                })
                .collect();
            equal_neighbor_update(&pts)?
        }
        (Gathered::Range { lo, hi }, UpdateRule::MidPoint) => {
            Point::new(vec![midpoint_update_1d(lo[0], hi[0])])?
        }
        (Gathered::Range { lo, hi }, _) => {
            Point::new(lo.iter().zip(hi).map(|(&a, &b)| midpoint_update_1d(a, b)).collect())?
        }
        (Gathered::Extremes { mins, maxs }, _) => average_extremes(mins, maxs),
        (Gathered::Points(ps), _) => {
            centroid(&convex_hull_with(ps, &opts.tolerances)?)?.centroid
        }
    };
    let memory = Gathered::reset(kind.rule, &x);
    Ok(AgentState {
        x,
        memory,
        round_in_macro: 0,
    })
}

fn merge(
    rule: UpdateRule,
    opts: &UpdateOptions,
    ctx: &RoundContext,
    d: usize,
    order: &[&Message],
) -> Result<Gathered> {
    let bad = |m: &Message, why: &str| {
        Error::Protocol(format!(
            "agent {} got a malformed payload from {}: {why}",
            ctx.agent, m.sender
        ))
    };
    match rule {
        UpdateRule::EqualNeighbor => {
            for m in order {
                match &m.payload {
                    Gathered::Position(p) if p.dim() == d => {}
                    _ => return Err(bad(m, "expected a position")),
                }
            }
            // the position memory is rebuilt at every (averaging) round
            Ok(Gathered::Position(Point::origin(d)))
        }
        UpdateRule::MidPoint | UpdateRule::ComponentMidPoint => {
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for m in order {
                let Gathered::Range { lo: l, hi: h } = &m.payload else {
                    return Err(bad(m, "expected a range"));
                };
                if l.len() != d || h.len() != d {
                    return Err(bad(m, "range dimension"));
                }
                for i in 0..d {
                    lo[i] = lo[i].min(l[i]);
                    hi[i] = hi[i].max(h[i]);
                }
            }
            Ok(Gathered::Range { lo, hi })
        }
        UpdateRule::ExtremePoint => {
            let mut cand_min: Vec<Vec<(AgentId, &Point)>> = vec![Vec::new(); d];
            let mut cand_max: Vec<Vec<(AgentId, &Point)>> = vec![Vec::new(); d];
            for m in order {
                let Gathered::Extremes { mins, maxs } = &m.payload else {
                    return Err(bad(m, "expected extreme points"));
                };
                if mins.len() != d || maxs.len() != d || mins.iter().chain(maxs).any(|p| p.dim() != d) {
                    return Err(bad(m, "extreme point dimension"));
                }
                for i in 0..d {
                    cand_min[i].push((m.sender, &mins[i]));
                    cand_max[i].push((m.sender, &maxs[i]));
                }
            }
            let mut mins = Vec::with_capacity(d);
            let mut maxs = Vec::with_capacity(d);
            for i in 0..d {
                mins.push(select_extreme(&cand_min[i], i, false, opts.tie_break, ctx, 0));
                maxs.push(select_extreme(&cand_max[i], i, true, opts.tie_break, ctx, 1));
            }
            Ok(Gathered::Extremes { mins, maxs })
        }
        UpdateRule::Centroid => {
            let mut pts: Vec<Point> = Vec::new();
            for m in order {
                let Gathered::Points(ps) = &m.payload else {
                    return Err(bad(m, "expected a point set"));
                };
                if ps.is_empty() || ps.iter().any(|p| p.dim() != d) {
                    return Err(bad(m, "point set empty or of wrong dimension"));
                }
                pts.extend(ps.iter().cloned());
            }
            pts.sort_by(|a, b| a.lex_cmp(b));
            pts.dedup();
            if opts.frame_reduction && pts.len() > 1 {
                pts = convex_hull_with(&pts, &opts.tolerances)?.vertices().to_vec();
            }
            Ok(Gathered::Points(pts))
        }
    }
}

/// Picks the candidate with extreme `i`-th coordinate. Candidates arrive
/// sorted by sender.
fn select_extreme(
    cands: &[(AgentId, &Point)],
    i: usize,
    maximize: bool,
    tie: TieBreak,
    ctx: &RoundContext,
    side: u64,
) -> Point {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let best = cands
        .iter()
        .map(|(_, p)| p[i])
        .fold(cands[0].1[i], |acc, v| if better(v, acc) { v } else { acc });
    let mut tied: Vec<&(AgentId, &Point)> = cands.iter().filter(|(_, p)| p[i] == best).collect();
    match tie {
        TieBreak::LowestSender => {
            tied.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.lex_cmp(b.1)));
            tied[0].1.clone()
        }
        TieBreak::Random { seed } => {
            let mut rng = derived_rng(seed, &[ctx.round, ctx.agent.0 as u64, i as u64, side]);
            tied[rng.random_range(0..tied.len())].1.clone()
        }
    }
}

fn average_extremes(mins: &[Point], maxs: &[Point]) -> Point {
    let d = mins.len();
    let mut acc = vec![0.0; d];
    for p in mins.iter().chain(maxs) {
        acc.iter_mut().zip(p.coords()).for_each(|(a, c)| *a += c);
    }
    Point::new(acc.into_iter().map(|a| a / (2 * d) as f64).collect()).expect("finite mean")
}

fn check_nonempty(received: &[Point]) -> Result<usize> {
    let d = received
        .first()
        .ok_or_else(|| Error::InvalidArgument("update with no received positions".into()))?
        .dim();
    if received.iter().any(|p| p.dim() != d) {
        return Err(Error::InvalidArgument("mixed point dimensions".into()));
    }
    Ok(d)
}

/// Mean of the received multiset: every in-neighbor weighs `1 / |In_p|`.
pub fn equal_neighbor_update(received: &[Point]) -> Result<Point> {
    check_nonempty(received)?;
    Ok(Point::mean(received))
}

/// Midpoint of `[m, big_m]`.
pub fn midpoint_update_1d(m: f64, big_m: f64) -> f64 {
    0.5 * (m + big_m)
}

/// Coordinate-wise midpoint of the received set. Rejected for `d >= 3`,
/// where it can leave the convex hull.
pub fn component_midpoint_update(received: &[Point]) -> Result<Point> {
    let d = check_nonempty(received)?;
    if d >= 3 {
        return Err(Error::InvalidArgument(format!(
            "component-wise midpoint in dimension {d} may leave the convex hull"
        )));
    }
    Ok(component_midpoint_update_unchecked(received))
}

/// Coordinate-wise midpoint without the dimension guard. For `d >= 3` the
/// result need not lie in the hull of `received`; only meant for
/// demonstrating exactly that.
pub fn component_midpoint_update_unchecked(received: &[Point]) -> Point {
    let (lo, hi) = component_extrema(received).expect("non-empty received set");
    Point::new(lo.iter().zip(&hi).map(|(&a, &b)| midpoint_update_1d(a, b)).collect())
        .expect("finite midpoint")
}

/// Mean of one minimal and one maximal point per coordinate, ties going to
/// the earliest point in `received`.
pub fn extreme_point_update(received: &[Point], d: usize) -> Result<Point> {
    let dim = check_nonempty(received)?;
    if dim != d {
        return Err(Error::InvalidArgument(format!(
            "points have dimension {dim}, expected {d}"
        )));
    }
    let pick = |i: usize, maximize: bool| -> &Point {
        received
            .iter()
            .reduce(|best, p| {
                let better = if maximize { p[i] > best[i] } else { p[i] < best[i] };
                if better {
                    p
                } else {
                    best
                }
            })
            .expect("non-empty")
    };
    let mins: Vec<Point> = (0..d).map(|i| pick(i, false).clone()).collect();
    let maxs: Vec<Point> = (0..d).map(|i| pick(i, true).clone()).collect();
    Ok(average_extremes(&mins, &maxs))
}

/// Centroid of the convex hull of the received set; multiplicities are ignored.
pub fn centroid_update(received: &[Point]) -> Result<Point> {
    check_nonempty(received)?;
    Ok(centroid(&convex_hull_with(received, &Tolerances::default())?)?.centroid)
}
