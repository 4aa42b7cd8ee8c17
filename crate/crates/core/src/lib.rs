//! Simulation and verification of multi-dimensional asymptotic consensus
//! on dynamic directed communication networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`graphs`]: round communication graphs, graph predicates and seeded
//!   communication-pattern generators.
//! * [`geometry`]: convex hulls in `R^d`, hull membership, exact polytope
//!   centroids and a Monte Carlo centroid oracle.
//! * [`algorithms`]: the per-agent update rules (EqualNeighbor, MidPoint,
//!   component-wise MidPoint, ExtremePoint, Centroid) and their amortized
//!   (value-gathering) variants.
//! * [`simulator`]: the synchronous round engine, convergence metrics and
//!   convergence-time bounds.
//! * [`verification`]: independent checkers (safeness audit, stochastic
//!   matrix reconstruction, Moreau-type assumption checks, a naive 1-D oracle).
//! * [`trace_io`]: CSV encoding of traces.
//!
//! Agents are 0-indexed. Rounds are 1-indexed: the graph of round `t` moves
//! the configuration from `x(t-1)` to `x(t)`.

pub mod algorithms;
pub mod error;
pub mod geometry;
pub mod graphs;
pub mod rng;
pub mod simulator;
pub mod trace_io;
pub mod verification;

pub use error::{Error, Result};
