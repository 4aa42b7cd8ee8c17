//! Independent checkers for simulator traces.
//!
//! Nothing here calls into the update rules: safeness is recomputed from
//! the pattern and the recorded positions, and [`brute_force_consensus_1d`]
//! iterates explicit weight matrices on plain adjacency tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{infinitely_often_union, AgentId, CommGraph, CommPattern};
use crate::simulator::{RunTrace, DELTA_FLOOR};
use crate::algorithms::{AlgorithmKind, UpdateRule};

/// Absolute allowance on realized safeness before a round counts as a violation.
pub const ALPHA_SLACK: f64 = 1e-9;

/// Rounding allowance, in units of `f64::EPSILON` times the magnitude of
/// the values involved. Once a component range shrinks to a few ulps the
/// realized margin is pure rounding noise; this keeps such rounds from
/// being reported as violations.
pub const ROUNDING_ULPS: f64 = 16.0;

fn rounding_noise(lo: f64, hi: f64, x: f64) -> f64 {
    ROUNDING_ULPS * f64::EPSILON * lo.abs().max(hi.abs()).max(x.abs())
}

/// Realized safeness of one agent at one averaging round, per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMargins {
    pub round: u64,
    /// `alpha[p][k]`; `None` where the in-neighbor range of component `k`
    /// is below [`DELTA_FLOOR`].
    pub alpha: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafenessViolation {
    pub round: u64,
    pub agent: usize,
    pub component: usize,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafenessReport {
    pub claimed_alpha: f64,
    /// Smallest realized margin over the constraints not excused by rounding;
    /// `None` if there were none.
    pub worst_alpha: Option<f64>,
    pub rounds: Vec<RoundMargins>,
    pub violations: Vec<SafenessViolation>,
    /// Constraints below `claimed_alpha - ALPHA_SLACK` that were within the
    /// rounding allowance.
    pub rounding_excused: usize,
}

impl SafenessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_trace_pattern(trace: &RunTrace, pattern: &CommPattern) -> Result<()> {
    if pattern.n() != trace.spec.n {
        return Err(Error::InvalidArgument(format!(
            "pattern has {} agents, trace has {}",
            pattern.n(),
            trace.spec.n
        )));
    }
    if trace.configs.len() < 2 {
        return Err(Error::InvalidArgument("trace must span at least one round".into()));
    }
    Ok(())
}

/// Product of the pattern's graphs over rounds `from + 1 ..= to`.
fn macro_graph(pattern: &CommPattern, from: u64, to: u64) -> Result<CommGraph> {
    let mut g = CommGraph::new(pattern.n());
    for t in from + 1..=to {
        g = g.product(&pattern.graph(t))?;
    }
    Ok(g)
}

/// Re-derives each agent's in-neighbor ranges from `pattern` and checks the
/// safeness inequalities on every averaging round of `trace`.
///
/// For amortized runs the constraint is taken over a whole macro-round: the
/// positions at its start and the product of its graphs.
pub fn audit_safeness(trace: &RunTrace, pattern: &CommPattern, claimed_alpha: f64) -> Result<SafenessReport> {
    check_trace_pattern(trace, pattern)?;
    let period = trace.period() as u64;
    let mut rounds = Vec::new();
    let mut violations = Vec::new();
    let mut worst: Option<f64> = None;
    let mut excused = 0;

    let mut t = period;
    while t <= trace.rounds() {
        let before = &trace.configs[(t - period) as usize];
        let after = &trace.configs[t as usize];
        let g = macro_graph(pattern, t - period, t)?;
        let mut alpha = Vec::with_capacity(trace.spec.n);
        for p in 0..trace.spec.n {
            let ins = g.in_neighbors(AgentId(p));
            let mut row = Vec::with_capacity(trace.spec.d);
            for k in 0..trace.spec.d {
                let (lo, hi) = ins.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                    let v = before.positions[q.0][k];
                    (lo.min(v), hi.max(v))
                });
                let range = hi - lo;
                let x = after.positions[p][k];
                let margin = if range > DELTA_FLOOR {
                    Some((x - lo).min(hi - x) / range)
                } else {
                    None
                };
                if let Some(m) = margin {
                    let need = (claimed_alpha - ALPHA_SLACK) * range;
                    if m < claimed_alpha - ALPHA_SLACK && (x - lo).min(hi - x) + rounding_noise(lo, hi, x) >= need {
                        excused += 1;
                    } else {
                        worst = Some(worst.map_or(m, |w| w.min(m)));
                        if m < claimed_alpha - ALPHA_SLACK {
                            violations.push(SafenessViolation { round: t, agent: p, component: k, margin: m });
                        }
                    }
                }
                row.push(margin);
            }
            alpha.push(row);
        }
        rounds.push(RoundMargins { round: t, alpha });
        t += period;
    }
    Ok(SafenessReport {
        claimed_alpha,
        worst_alpha: worst,
        rounds,
        violations,
        rounding_excused: excused,
    })
}

/// Weights `a` with `a_i >= alpha / n`, `sum a = 1` and `sum a_i v_i = x`.
///
/// Uses `a = (alpha/n) 1 + (1 - alpha) b` where `b` puts all its mass on the
/// two end values. `x` may exceed the safe interval by `1e-9` of the range
/// plus a rounding allowance of a few ulps; it is then clamped.
pub fn decompose_safe_value(values: &[f64], x: f64, alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1/2], got {alpha}")));
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no values to decompose over".into()));
    }
    if values.iter().any(|v| !v.is_finite()) || !x.is_finite() {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("values must be sorted ascending".into()));
    }
    let (v1, vn) = (values[0], values[n - 1]);
    let range = vn - v1;
    if range <= 0.0 {
        if (x - v1).abs() > 1e-12 * v1.abs().max(1.0) {
            return Err(Error::OutOfRange { x, lo: v1, hi: v1 });
        }
        return Ok(vec![1.0 / n as f64; n]);
    }
    let lo = (1.0 - alpha) * v1 + alpha * vn;
    let hi = alpha * v1 + (1.0 - alpha) * vn;
    let tol = 1e-9 * range + rounding_noise(v1, vn, x);
    if x < lo - tol || x > hi + tol {
        return Err(Error::OutOfRange { x, lo, hi });
    }
    let x = x.clamp(lo, hi);
    let mean = values.iter().sum::<f64>() / n as f64;
    let y = (x - alpha * mean) / (1.0 - alpha);
    let lambda = ((y - v1) / range).clamp(0.0, 1.0);
    let base = alpha / n as f64;
    let mut a = vec![base; n];
    a[0] += (1.0 - alpha) * (1.0 - lambda);
    a[n - 1] += (1.0 - alpha) * lambda;
    Ok(a)
}

/// Sparse row-stochastic matrix: `rows[p]` lists `(q, A_pq)` for `A_pq > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            rows: (0..n).map(|p| vec![(p, 1.0)]).collect(),
        }
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.rows[p].iter().find(|(j, _)| *j == q).map_or(0.0, |&(_, w)| w)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (p, row) in self.rows.iter().enumerate() {
            for &(q, w) in row {
                m[p][q] += w;
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(q, w)| w * x[q]).sum())
            .collect()
    }

    /// Graph with an edge `p -> q` whenever `A_pq > 0`.
    pub fn associated_graph(&self) -> CommGraph {
        let mut g = CommGraph::new(self.n);
        for (p, row) in self.rows.iter().enumerate() {
            for &(q, w) in row {
                if w > 0.0 && p != q {
                    g.add_edge(p, q).expect("indices in range");
                }
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMatrices {
    /// Round at which `x(round) = A_k x(round - period)` holds.
    pub round: u64,
    /// Graph driving the round (the macro-round product for amortized runs).
    pub graph: CommGraph,
    /// One matrix per component.
    pub matrices: Vec<SparseMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrixSeq {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub period: usize,
    pub rounds: Vec<RoundMatrices>,
}

/// Writes every averaging round of an `alpha`-safe run as `d` stochastic
/// matrices, row `p` of `A_k(t)` decomposing `x_p,k(t)` over the values of
/// `p`'s in-neighbors.
pub fn reconstruct_matrices(trace: &RunTrace, pattern: &CommPattern, alpha: f64) -> Result<StochasticMatrixSeq> {
    check_trace_pattern(trace, pattern)?;
    let (n, d) = (trace.spec.n, trace.spec.d);
    let period = trace.period() as u64;
    let mut rounds = Vec::new();
    let mut t = period;
    while t <= trace.rounds() {
        let before = &trace.configs[(t - period) as usize];
        let after = &trace.configs[t as usize];
        let g = macro_graph(pattern, t - period, t)?;
        let mut matrices = Vec::with_capacity(d);
        for k in 0..d {
            let mut rows = Vec::with_capacity(n);
            for p in 0..n {
                let mut ins: Vec<(f64, usize)> = g
                    .in_neighbors(AgentId(p))
                    .into_iter()
                    .map(|q| (before.positions[q.0][k], q.0))
                    .collect();
                ins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let values: Vec<f64> = ins.iter().map(|v| v.0).collect();
                let x = after.positions[p][k];
                let range = values[values.len() - 1] - values[0];
                let weights = if range <= DELTA_FLOOR {
                    vec![1.0 / values.len() as f64; values.len()]
                } else {
                    decompose_safe_value(&values, x, alpha).map_err(|e| Error::SafenessViolation {
                        round: t,
                        agent: p,
                        component: k,
                        detail: e.to_string(),
                    })?
                };
                let mut row: Vec<(usize, f64)> = ins.iter().map(|v| v.1).zip(weights).collect();
                row.sort_by_key(|e| e.0);
                rows.push(row);
            }
            matrices.push(SparseMatrix { n, rows });
        }
        rounds.push(RoundMatrices { round: t, graph: g, matrices });
        t += period;
    }
    Ok(StochasticMatrixSeq {
        n,
        d,
        alpha,
        period: period as usize,
        rounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoreauReport {
    /// Every diagonal entry is positive.
    pub a1_positive_diagonal: bool,
    /// Every positive entry is at least `a`.
    pub a2_entries_bounded_below: bool,
    /// Every associated graph is bidirectional.
    pub a3_bidirectional: bool,
    /// Edges present in every window of the pattern form a strongly
    /// connected graph.
    pub a4_strongly_connected: bool,
    /// `(round, component, agent)` with a zero diagonal.
    pub a1_witnesses: Vec<(u64, usize, usize)>,
    /// `(round, component, p, q, value)` with `0 < A_pq < a`.
    pub a2_witnesses: Vec<(u64, usize, usize, usize, f64)>,
    /// `(round, component)` whose associated graph is not bidirectional.
    pub a3_witnesses: Vec<(u64, usize)>,
    /// Edges of the recurring graph used for the connectivity check.
    pub a4_recurring_edges: Vec<(usize, usize)>,
}

impl MoreauReport {
    pub fn all_hold(&self) -> bool {
        self.a1_positive_diagonal
            && self.a2_entries_bounded_below
            && self.a3_bidirectional
            && self.a4_strongly_connected
    }
}

/// Checks the four standing assumptions of the classical convergence
/// result for products of stochastic matrices. The recurring-edge graph is
/// taken over `window`-round blocks of `pattern` up to the last round of `seq`.
pub fn check_moreau_assumptions(
    seq: &StochasticMatrixSeq,
    pattern: &CommPattern,
    a: f64,
    window: usize,
) -> Result<MoreauReport> {
    let slack = 1e-12;
    let mut a1 = Vec::new();
    let mut a2 = Vec::new();
    let mut a3 = Vec::new();
    for rm in &seq.rounds {
        for (k, m) in rm.matrices.iter().enumerate() {
            for p in 0..m.n {
                if m.get(p, p) <= 0.0 {
                    a1.push((rm.round, k, p));
                }
                for &(q, w) in &m.rows[p] {
                    if w > 0.0 && w < a - slack {
                        a2.push((rm.round, k, p, q, w));
                    }
                }
            }
            if !m.associated_graph().is_bidirectional() {
                a3.push((rm.round, k));
            }
        }
    }
    let horizon = seq.rounds.last().map_or(0, |r| r.round);
    let recurring = if seq.n <= 1 {
        Some(CommGraph::new(seq.n.max(1)))
    } else if horizon >= window as u64 && window > 0 {
        Some(infinitely_often_union(pattern, window, horizon)?)
    } else {
        None
    };
    Ok(MoreauReport {
        a1_positive_diagonal: a1.is_empty(),
        a2_entries_bounded_below: a2.is_empty(),
        a3_bidirectional: a3.is_empty(),
        a4_strongly_connected: recurring.as_ref().is_some_and(CommGraph::is_strongly_connected),
        a1_witnesses: a1,
        a2_witnesses: a2,
        a3_witnesses: a3,
        a4_recurring_edges: recurring.map(|g| g.edges().filter(|(p, q)| p != q).collect()).unwrap_or_default(),
    })
}

/// Largest instance [`brute_force_consensus_1d`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 5;
pub const BRUTE_FORCE_MAX_ROUNDS: usize = 20;

/// Reference trace `x(0), ..., x(H)` for a one-dimensional run on the
/// graphs `prefix` (round `t` uses `prefix[t - 1]`).
///
/// Supports EqualNeighbor, MidPoint and amortized MidPoint. Each round
/// builds the dense weight matrix from the adjacency table and multiplies.
pub fn brute_force_consensus_1d(values: &[f64], prefix: &[CommGraph], algorithm: AlgorithmKind) -> Result<Vec<Vec<f64>>> {
    let n = values.len();
    if n == 0 || n > BRUTE_FORCE_MAX_N || prefix.len() > BRUTE_FORCE_MAX_ROUNDS {
        return Err(Error::SizeLimit(format!(
            "brute force handles 1..={BRUTE_FORCE_MAX_N} agents and at most {BRUTE_FORCE_MAX_ROUNDS} rounds, got {n} and {}",
            prefix.len()
        )));
    }
    if prefix.iter().any(|g| g.n() != n) {
        return Err(Error::InvalidArgument("graph size differs from the number of values".into()));
    }
    let period = match (algorithm.rule, algorithm.amortized) {
        (UpdateRule::EqualNeighbor, false) | (UpdateRule::MidPoint, false) => 1,
        (UpdateRule::MidPoint, true) => algorithm.period.unwrap_or(n.saturating_sub(1)).max(1),
        _ => {
            return Err(Error::Unsupported(format!("brute force does not model {algorithm}")));
        }
    };

    // adj[q][p]: q's value reaches p
    let table = |g: &CommGraph| -> Vec<Vec<bool>> {
        (0..n).map(|q| (0..n).map(|p| g.has_edge(q, p)).collect()).collect()
    };
    let compose = |a: &Vec<Vec<bool>>, b: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
        (0..n)
            .map(|q| (0..n).map(|p| (0..n).any(|r| a[q][r] && b[r][p])).collect())
            .collect()
    };
    let identity: Vec<Vec<bool>> = (0..n).map(|q| (0..n).map(|p| p == q).collect()).collect();

    let mut trace = vec![values.to_vec()];
    let mut x = values.to_vec();
    let mut reach = identity.clone();
    for (i, g) in prefix.iter().enumerate() {
        let t = i + 1;
        reach = compose(&reach, &table(g));
        if t % period != 0 {
            trace.push(x.clone());
            continue;
        }
        let mut w = vec![vec![0.0; n]; n];
        for p in 0..n {
            let senders: Vec<usize> = (0..n).filter(|&q| reach[q][p]).collect();
            if algorithm.rule == UpdateRule::EqualNeighbor {
                for &q in &senders {
                    w[p][q] += 1.0 / senders.len() as f64;
                }
            } else {
                let lo = *senders.iter().min_by(|&&a, &&b| x[a].total_cmp(&x[b])).expect("self-loop");
                let hi = *senders.iter().max_by(|&&a, &&b| x[a].total_cmp(&x[b])).expect("self-loop");
                w[p][lo] += 0.5;
                w[p][hi] += 0.5;
            }
        }
        x = (0..n).map(|p| (0..n).map(|q| w[p][q] * x[q]).sum()).collect();
        trace.push(x.clone());
        reach = identity.clone();
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::UpdateRule;
    use crate::geometry::pt;
    use crate::graphs::PatternSpec;
    use crate::simulator::{run, InitialConfig, RunSpec};

    fn explicit_spec(algorithm: AlgorithmKind, pattern: PatternSpec, xs: &[f64], rounds: u64) -> RunSpec {
        let mut spec = RunSpec::new(xs.len(), 1, algorithm, pattern, 5);
        spec.initial = InitialConfig::Explicit { positions: xs.iter().map(|&x| pt(&[x])).collect() };
        spec.epsilon = 1e-300;
        spec.max_rounds = rounds;
        spec
    }

    #[test]
    fn midpoint_audit_is_exactly_one_half() {
        let spec = explicit_spec(
            AlgorithmKind::plain(UpdateRule::MidPoint),
            PatternSpec::RandomNonsplit { seed: Some(3) },
            &[0.0, 0.25, 0.5, 0.75, 1.0],
            12,
        );
        let tr = run(&spec).unwrap();
        let pattern = spec.build_pattern().unwrap();
        let rep = audit_safeness(&tr, &pattern, 0.5).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.worst_alpha, Some(0.5));
    }

    #[test]
    fn centroid_and_extreme_point_audits() {
        for (rule, d, alpha) in [(UpdateRule::Centroid, 3, 0.25), (UpdateRule::ExtremePoint, 2, 0.25)] {
            let mut spec = RunSpec::new(6, d, AlgorithmKind::plain(rule), PatternSpec::RandomRooted { seed: None }, 11);
            spec.max_rounds = 40;
            let tr = run(&spec).unwrap();
            let rep = audit_safeness(&tr, &spec.build_pattern().unwrap(), alpha).unwrap();
            assert!(rep.passed(), "{rule:?}: {:?}", rep.violations.first());
            assert!(rep.worst_alpha.unwrap() >= alpha - 1e-9);
        }
    }

    #[test]
    fn audit_flags_a_wrong_claim_and_bad_inputs() {
        let spec = explicit_spec(AlgorithmKind::plain(UpdateRule::EqualNeighbor), PatternSpec::Complete, &[0.0, 0.0, 0.0, 1.0], 1);
        let tr = run(&spec).unwrap();
        let pattern = spec.build_pattern().unwrap();
        let rep = audit_safeness(&tr, &pattern, 0.5).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.worst_alpha, Some(0.25));
        assert!(audit_safeness(&tr, &pattern, 0.25).unwrap().passed());
        assert!(audit_safeness(&tr, &CommPattern::fixed(CommGraph::complete(3)), 0.25).is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(decompose_safe_value(&[0.0, 1.0], 0.5, 0.5).unwrap(), vec![0.5, 0.5]);
        assert_eq!(decompose_safe_value(&[0.0; 4], 0.0, 0.3).unwrap(), vec![0.25; 4]);
        let v = [0.0, 1.0, 2.0, 3.0];
        let a = decompose_safe_value(&v, 1.2, 0.4).unwrap();
        assert!(a.iter().all(|&w| (0.1 - 1e-15..=1.0).contains(&w)), "{a:?}");
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let x: f64 = a.iter().zip(&v).map(|(w, v)| w * v).sum();
        assert!((x - 1.2).abs() < 1e-12);

        assert!(matches!(decompose_safe_value(&v, 1.0, 0.4), Err(Error::OutOfRange { .. })));
        assert!(matches!(decompose_safe_value(&v, 1.5, 0.6), Err(Error::InvalidArgument(_))));
        assert!(matches!(decompose_safe_value(&[1.0, 0.0], 0.5, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn decomposition_endpoints_match_a_grid_search() {
        // feasible x over weights on a coarse simplex grid, a_i >= alpha/n
        let v = [0.0, 1.0, 2.0, 3.0];
        let alpha = 0.4;
        let steps = 60;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=steps {
            for j in 0..=steps - i {
                for k in 0..=steps - i - j {
                    let l = steps - i - j - k;
                    let a = [i, j, k, l].map(|c| c as f64 / steps as f64);
                    if a.iter().all(|&w| w >= alpha / 4.0 - 1e-12) {
                        let x: f64 = a.iter().zip(&v).map(|(w, v)| w * v).sum();
                        lo = lo.min(x);
                        hi = hi.max(x);
                    }
                }
            }
        }
        // the safe interval [1.2, 1.8] sits inside the feasible range
        assert!(lo <= 1.2 && hi >= 1.8, "{lo} {hi}");
        for i in 0..=60 {
            let x = 1.2 + 0.6 * i as f64 / 60.0;
            assert!(decompose_safe_value(&v, x, alpha).is_ok(), "{x}");
        }
        assert!(decompose_safe_value(&v, 1.2 - 1e-6, alpha).is_err());
        assert!(decompose_safe_value(&v, 1.8 + 1e-6, alpha).is_err());
    }

    #[test]
    fn matrices_from_runs() {
        // self-loops only: identity
        let spec = explicit_spec(AlgorithmKind::plain(UpdateRule::MidPoint), PatternSpec::SelfLoops, &[0.0, 1.0, 3.0], 2);
        let tr = run(&spec).unwrap();
        let seq = reconstruct_matrices(&tr, &spec.build_pattern().unwrap(), 0.5).unwrap();
        assert_eq!(seq.rounds.len(), 2);
        for rm in &seq.rounds {
            assert_eq!(rm.matrices[0], SparseMatrix::identity(3));
        }

        // complete graph: every row weighs the extreme holders by at least alpha/n
        let spec = explicit_spec(AlgorithmKind::plain(UpdateRule::MidPoint), PatternSpec::Complete, &[0.0, 1.0, 3.0], 1);
        let tr = run(&spec).unwrap();
        let seq = reconstruct_matrices(&tr, &spec.build_pattern().unwrap(), 0.5).unwrap();
        let m = seq.rounds[0].matrices[0].dense();
        for row in &m {
            assert!(row[0] >= 0.5 / 3.0 && row[2] >= 0.5 / 3.0);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(seq.rounds[0].matrices[0].apply(&[0.0, 1.0, 3.0]), vec![1.5; 3]);
    }

    #[test]
    fn centroid_matrices_reproduce_positions_per_component() {
        let mut spec = RunSpec::new(5, 2, AlgorithmKind::plain(UpdateRule::Centroid), PatternSpec::RandomNonsplit { seed: None }, 8);
        spec.max_rounds = 6;
        let tr = run(&spec).unwrap();
        let pattern = spec.build_pattern().unwrap();
        let seq = reconstruct_matrices(&tr, &pattern, 1.0 / 3.0).unwrap();
        let mut differ = false;
        for rm in &seq.rounds {
            let t = rm.round as usize;
            for k in 0..2 {
                let prev: Vec<f64> = tr.configs[t - 1].positions.iter().map(|p| p[k]).collect();
                let next = rm.matrices[k].apply(&prev);
                let range = tr.deltas[t - 1][k];
                for p in 0..5 {
                    assert!((next[p] - tr.configs[t].positions[p][k]).abs() <= 1e-9 * range);
                }
                assert!(rm.matrices[k].associated_graph() == rm.graph.reversed());
            }
            differ |= rm.matrices[0] != rm.matrices[1];
        }
        assert!(differ, "component matrices coincided on every round");
    }

    #[test]
    fn reconstruction_rejects_unsafe_rounds() {
        let spec = explicit_spec(AlgorithmKind::plain(UpdateRule::EqualNeighbor), PatternSpec::Complete, &[0.0, 0.0, 0.0, 1.0], 1);
        let tr = run(&spec).unwrap();
        let err = reconstruct_matrices(&tr, &spec.build_pattern().unwrap(), 0.5).unwrap_err();
        assert!(matches!(err, Error::SafenessViolation { round: 1, .. }));
    }

    #[test]
    fn moreau_examples() {
        let seq = StochasticMatrixSeq {
            n: 3,
            d: 1,
            alpha: 0.5,
            period: 1,
            rounds: (1..=12)
                .map(|t| RoundMatrices { round: t, graph: CommGraph::new(3), matrices: vec![SparseMatrix::identity(3)] })
                .collect(),
        };
        let rep = check_moreau_assumptions(&seq, &CommPattern::fixed(CommGraph::new(3)), 0.5 / 3.0, 4).unwrap();
        assert!(rep.a1_positive_diagonal && rep.a2_entries_bounded_below && rep.a3_bidirectional);
        assert!(!rep.a4_strongly_connected);

        let mut bad = seq.clone();
        bad.rounds[4].matrices[0].rows[1] = vec![(0, 1.0)];
        let rep = check_moreau_assumptions(&bad, &CommPattern::fixed(CommGraph::new(3)), 0.5 / 3.0, 4).unwrap();
        assert!(!rep.a1_positive_diagonal);
        assert_eq!(rep.a1_witnesses, vec![(5, 0, 1)]);
        assert!(!rep.a3_bidirectional);
    }

    #[test]
    fn midpoint_on_intermittent_pattern_meets_all_assumptions() {
        let n = 6;
        let mut spec = RunSpec::new(n, 1, AlgorithmKind::plain(UpdateRule::MidPoint), PatternSpec::BidirectionalIntermittent { period: 4, seed: Some(2) }, 1);
        spec.epsilon = 1e-300;
        spec.max_rounds = 40;
        let tr = run(&spec).unwrap();
        let pattern = spec.build_pattern().unwrap();
        let seq = reconstruct_matrices(&tr, &pattern, 0.5).unwrap();
        let rep = check_moreau_assumptions(&seq, &pattern, 0.5 / n as f64, 4).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
    }

    #[test]
    fn brute_force_examples() {
        let g = CommGraph::complete(2);
        let tr = brute_force_consensus_1d(&[0.0, 1.0], &[g], AlgorithmKind::plain(UpdateRule::MidPoint)).unwrap();
        assert_eq!(tr[1], vec![0.5, 0.5]);

        let too_many = vec![CommGraph::new(2); 21];
        assert!(matches!(
            brute_force_consensus_1d(&[0.0, 1.0], &too_many, AlgorithmKind::plain(UpdateRule::MidPoint)),
            Err(Error::SizeLimit(_))
        ));
        assert!(brute_force_consensus_1d(&[0.0; 6], &[], AlgorithmKind::plain(UpdateRule::MidPoint)).is_err());
        assert!(brute_force_consensus_1d(&[0.0, 1.0], &[], AlgorithmKind::plain(UpdateRule::Centroid)).is_err());
    }

    fn compare(algorithm: AlgorithmKind, pattern: PatternSpec, xs: &[f64], rounds: u64) {
        let spec = explicit_spec(algorithm, pattern, xs, rounds);
        let tr = run(&spec).unwrap();
        let prefix = spec.build_pattern().unwrap().prefix(tr.rounds());
        let oracle = brute_force_consensus_1d(xs, &prefix, algorithm).unwrap();
        assert_eq!(oracle.len(), tr.configs.len());
        for (o, c) in oracle.iter().zip(&tr.configs) {
            for (a, b) in o.iter().zip(&c.positions) {
                assert!((a - b[0]).abs() <= 1e-12, "{algorithm}: {a} vs {}", b[0]);
            }
        }
    }

    #[test]
    fn brute_force_matches_simulator() {
        let xs = [0.3, -1.0, 2.5];
        compare(AlgorithmKind::plain(UpdateRule::MidPoint), PatternSpec::RotatingStar, &xs, 10);
        let cyc = CommGraph::cycle(3);
        compare(AlgorithmKind::plain(UpdateRule::EqualNeighbor), PatternSpec::Fixed { graph: cyc }, &xs, 10);
        compare(AlgorithmKind::amortized(UpdateRule::MidPoint), PatternSpec::RandomRooted { seed: Some(4) }, &[0.1, 0.9, 0.4, 0.7, 0.2], 20);
    }
}
