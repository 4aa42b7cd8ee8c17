//! Directed communication graphs with self-loops.
//!
//! A [`CommGraph`] stores, for every agent, bitsets of its in- and
//! out-neighbors. An edge `(p, q)` means that `p` sends to `q` in the round
//! the graph describes. Every node always carries a self-loop.

mod pattern;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pattern::{infinitely_often_union, CommPattern, NetworkModelKind, PatternSpec};

/// Index of an agent in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

/// JSON literal form of a graph: `{"n": 3, "edges": [[0, 1], [1, 2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphLiteral {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// A directed graph on `n` agents in which every node has a self-loop.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphLiteral", into = "GraphLiteral")]
pub struct CommGraph {
    n: usize,
    words: usize,
    /// `incoming[q * words ..]` has bit `p` set iff `p -> q`.
    incoming: Vec<u64>,
    /// `outgoing[p * words ..]` has bit `q` set iff `p -> q`.
    outgoing: Vec<u64>,
}

impl CommGraph {
    /// The graph with only self-loops.
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let mut g = CommGraph {
            n,
            words,
            incoming: vec![0; n * words],
            outgoing: vec![0; n * words],
        };
        for p in 0..n {
            g.set(p, p);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = CommGraph::new(n);
        for p in 0..n {
            for q in 0..n {
                g.set(p, q);
            }
        }
        g
    }

    /// Self-loops plus the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = CommGraph::new(n);
        for &(p, q) in edges {
            g.add_edge(p, q)?;
        }
        Ok(g)
    }

    /// Star with edges `center -> p` for every `p`.
    pub fn out_star(n: usize, center: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|q| (center, q)).collect();
        CommGraph::from_edges(n, &edges)
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|p| (p, (p + 1) % n)).collect();
        CommGraph::from_edges(n, &edges).expect("cycle edges are in range")
    }

    /// Parses a graph literal, adding missing self-loops. The returned list
    /// names every agent whose self-loop had to be added.
    pub fn from_literal(lit: &GraphLiteral) -> Result<(Self, Vec<AgentId>)> {
        let mut present = vec![false; lit.n];
        for &[p, q] in &lit.edges {
            if p == q && p < lit.n {
                present[p] = true;
            }
        }
        let edges: Vec<_> = lit.edges.iter().map(|&[p, q]| (p, q)).collect();
        let g = CommGraph::from_edges(lit.n, &edges)?;
        let added: Vec<AgentId> = (0..lit.n).filter(|&p| !present[p]).map(AgentId).collect();
        if !added.is_empty() {
            log::warn!(
                "graph literal is missing {} self-loop(s); added on load",
                added.len()
            );
        }
        Ok((g, added))
    }

    pub fn to_literal(&self) -> GraphLiteral {
        GraphLiteral {
            n: self.n,
            edges: self.edges().map(|(p, q)| [p, q]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn set(&mut self, p: usize, q: usize) {
        self.incoming[q * self.words + p / WORD] |= 1 << (p % WORD);
        self.outgoing[p * self.words + q / WORD] |= 1 << (q % WORD);
    }

    pub fn add_edge(&mut self, p: usize, q: usize) -> Result<()> {
        if p >= self.n || q >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge ({p}, {q}) out of range for n = {}",
                self.n
            )));
        }
        self.set(p, q);
        Ok(())
    }

    /// `true` iff `p` sends to `q`.
    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        p < self.n && q < self.n && self.incoming[q * self.words + p / WORD] >> (p % WORD) & 1 == 1
    }

    fn in_row(&self, q: usize) -> &[u64] {
        &self.incoming[q * self.words..(q + 1) * self.words]
    }

    fn out_row(&self, p: usize) -> &[u64] {
        &self.outgoing[p * self.words..(p + 1) * self.words]
    }

    /// In-neighbors of `p` in increasing index order; always contains `p`.
    pub fn in_neighbors(&self, p: AgentId) -> Vec<AgentId> {
        bits(self.in_row(p.0)).map(AgentId).collect()
    }

    pub fn out_neighbors(&self, p: AgentId) -> Vec<AgentId> {
        bits(self.out_row(p.0)).map(AgentId).collect()
    }

    pub fn in_degree(&self, p: AgentId) -> usize {
        self.in_row(p.0).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// All edges `(p, q)` in lexicographic order, self-loops included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |p| bits(self.out_row(p)).map(move |q| (p, q)))
    }

    pub fn edge_count(&self) -> usize {
        self.outgoing.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The product `self ∘ other`: `p -> q` iff `p -> r` in `self` and
    /// `r -> q` in `other` for some `r`.
    pub fn product(&self, other: &CommGraph) -> Result<CommGraph> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "graph product size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let mut out = CommGraph::new(self.n);
        for q in 0..self.n {
            let mut row = vec![0u64; self.words];
            for r in bits(other.in_row(q)) {
                for (acc, w) in row.iter_mut().zip(self.in_row(r)) {
                    *acc |= w;
                }
            }
            for p in bits(&row) {
                out.set(p, q);
            }
        }
        Ok(out)
    }

    /// Edge-wise union of two graphs on the same agents.
    pub fn union(&self, other: &CommGraph) -> Result<CommGraph> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "graph union size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let mut out = self.clone();
        for (p, q) in other.edges() {
            out.set(p, q);
        }
        Ok(out)
    }

    /// The graph with every edge reversed.
    pub fn reversed(&self) -> CommGraph {
        let mut out = CommGraph::new(self.n);
        for (p, q) in self.edges() {
            out.set(q, p);
        }
        out
    }

    fn reach_from(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(p) = queue.pop_front() {
            for q in bits(self.out_row(p)) {
                if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        seen
    }

    /// Nodes that reach every node along directed edges.
    pub fn roots(&self) -> Vec<AgentId> {
        (0..self.n)
            .filter(|&r| self.reach_from(r).iter().all(|&s| s))
            .map(AgentId)
            .collect()
    }

    /// `true` iff some node reaches every node, i.e. the graph has a rooted
    /// spanning tree.
    pub fn is_rooted(&self) -> bool {
        self.n == 0 || (0..self.n).any(|r| self.reach_from(r).iter().all(|&s| s))
    }

    /// `true` iff any two nodes have a common in-neighbor.
    pub fn is_nonsplit(&self) -> bool {
        (0..self.n).all(|p| {
            (p + 1..self.n).all(|q| {
                self.in_row(p)
                    .iter()
                    .zip(self.in_row(q))
                    .any(|(a, b)| a & b != 0)
            })
        })
    }

    pub fn is_bidirectional(&self) -> bool {
        self.edges().all(|(p, q)| self.has_edge(q, p))
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.reach_from(0).iter().all(|&s| s) && self.reversed().reach_from(0).iter().all(|&s| s)
    }
}

impl fmt::Debug for CommGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<_> = self.edges().filter(|(p, q)| p != q).collect();
        write!(f, "CommGraph {{ n: {}, edges: {:?} }}", self.n, edges)
    }
}

impl TryFrom<GraphLiteral> for CommGraph {
    type Error = Error;

    fn try_from(lit: GraphLiteral) -> Result<Self> {
        CommGraph::from_literal(&lit).map(|(g, _)| g)
    }
}

impl From<CommGraph> for GraphLiteral {
    fn from(g: CommGraph) -> Self {
        g.to_literal()
    }
}

/// In-neighbors of `p` in `g`.
pub fn in_neighbors(g: &CommGraph, p: AgentId) -> Vec<AgentId> {
    g.in_neighbors(p)
}

/// `g ∘ h`.
pub fn graph_product(g: &CommGraph, h: &CommGraph) -> Result<CommGraph> {
    g.product(h)
}

/// Product of a non-empty sequence of graphs, left to right.
pub fn product_of<'a, I>(graphs: I) -> Result<CommGraph>
where
    I: IntoIterator<Item = &'a CommGraph>,
{
    let mut it = graphs.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty graph product".into()))?
        .clone();
    it.try_fold(first, |acc, g| acc.product(g))
}

fn bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * WORD + b)
        })
    })
}
